#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "mstl/trainer.hpp"

using namespace mstl;

namespace {

// Step size matches the naval map scale these tests train on.
TrainConfig quick_config(int iterations, TrainMode mode = TrainMode::Attribute) {
  TrainConfig c;
  c.iterations = iterations;
  c.batch = 16;
  c.lr = 0.2;
  c.mode = mode;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("training is deterministic in the seed") {
  const Dataset data = generate_naval(std::vector<int>{10, 5, 5}, 2);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  const ArchConfig arch = make_arch(data, code.attributes());

  const auto [m1, r1] = train(data, code, arch, quick_config(40));
  const auto [m2, r2] = train(data, code, arch, quick_config(40));
  CHECK(m1.theta == m2.theta);
  CHECK(r1.formulae == r2.formulae);
  REQUIRE(r1.epochs.size() == r2.epochs.size());
  for (size_t e = 0; e < r1.epochs.size(); ++e) {
    CHECK(r1.epochs[e].loss == r2.epochs[e].loss);
    CHECK(r1.epochs[e].mcr == r2.epochs[e].mcr);
  }

  TrainConfig other = quick_config(40);
  other.seed = 4;
  const auto [m3, r3] = train(data, code, arch, other);
  CHECK(m3.theta != m1.theta);
}

TEST_CASE("shape and configuration mismatches are rejected") {
  const Dataset data = generate_naval(std::vector<int>{4, 2, 2}, 2);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  const ArchConfig arch = make_arch(data, code.attributes());

  ArchConfig wrong = arch;
  wrong.steps = 10;
  CHECK_THROWS_AS(train(data, code, wrong, quick_config(5)), std::invalid_argument);

  // Coding matrix with the wrong number of attribute columns.
  ArchConfig narrow = arch;
  narrow.attributes = 1;
  CHECK_THROWS_AS(train(data, code, narrow, quick_config(5)), std::invalid_argument);

  // Five-class matrix against a three-class dataset.
  CHECK_THROWS_AS(
      train(data, CodingMatrix::preset("synthetic"),
            make_arch(data, 4), quick_config(5)),
      std::invalid_argument);

  TrainConfig bad = quick_config(0);
  CHECK_THROWS_AS(train(data, code, arch, bad), std::invalid_argument);
}

TEST_CASE("runaway step sizes trip the divergence guard") {
  const Dataset data = generate_naval(std::vector<int>{4, 2, 2}, 6);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  TrainConfig c = quick_config(20);
  c.lr = 1e7;
  CHECK_THROWS_AS(train(data, code, make_arch(data, code.attributes()), c),
                  std::runtime_error);
}

TEST_CASE("a short run separates an easy dataset") {
  const Dataset data = generate_naval(std::vector<int>{30, 15, 15}, 11);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  const auto [model, report] =
      train(data, code, make_arch(data, code.attributes()), quick_config(600));

  CHECK(report.iterations_run == 600);
  CHECK(report.final_train_mcr <= 0.1);
  CHECK(report.final_train_mcr <= report.epochs.front().mcr);
  CHECK(report.formulae.size() == 2);
  CHECK(report.wall_seconds > 0);

  // Hard-semantics evaluation of the trained model on its training set.
  const EvalReport ev = evaluate(model, data, code, TrainMode::Attribute, 25.0,
                                 EvalMode::Hard, Decoder::LossBased);
  CHECK(ev.mcr_class <= 0.1);
  CHECK(ev.mcr_attribute >= ev.mcr_class);  // any-bit errors include decode errors
  int total = 0;
  for (const auto& row : ev.confusion)
    for (const int v : row) total += v;
  CHECK(total == static_cast<int>(data.size()));
}

TEST_CASE("early stopping halts after patience epochs without improvement") {
  const Dataset data = generate_naval(std::vector<int>{10, 5, 5}, 13);
  const CodingMatrix code = CodingMatrix::preset("naval-a2");
  TrainConfig c = quick_config(400);
  c.patience = 2;
  const auto [model, report] =
      train(data, code, make_arch(data, code.attributes()), c);
  if (report.iterations_run < 400) {
    // Stopped early: the best MCR was not beaten in the last `patience`
    // epochs.
    const size_t n = report.epochs.size();
    REQUIRE(n >= 3);
    double best = 2.0;
    for (size_t e = 0; e + 2 < n; ++e) best = std::min(best, report.epochs[e].mcr);
    CHECK(report.epochs[n - 2].mcr >= best);
    CHECK(report.epochs[n - 1].mcr >= best);
  }
  // patience = 0 always runs the exact budget.
  TrainConfig full = quick_config(40);
  full.patience = 0;
  CHECK(train(data, code, make_arch(data, code.attributes()), full)
            .second.iterations_run == 40);
}

TEST_CASE("restarts keep the run with the lowest training error") {
  const Dataset data = generate_naval(std::vector<int>{10, 5, 5}, 13);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  const ArchConfig arch = make_arch(data, code.attributes());

  const TrainConfig single = quick_config(120);
  TrainConfig multi = single;
  multi.restarts = 3;
  const double one = train(data, code, arch, single).second.final_train_mcr;
  const double best = train(data, code, arch, multi).second.final_train_mcr;
  CHECK(best <= one);

  TrainConfig bad = single;
  bad.restarts = 0;
  CHECK_THROWS_AS(train(data, code, arch, bad), std::invalid_argument);
}

TEST_CASE("class-mode training shapes outputs by the one-hot table") {
  const Dataset data = generate_naval(std::vector<int>{20, 10, 10}, 17);
  const CodingMatrix code = CodingMatrix::preset("naval-class");
  TrainConfig c = quick_config(300, TrainMode::Class);
  c.restarts = 3;
  const auto [model, report] = train(data, code, make_arch(data, code.attributes()), c);
  CHECK(report.formulae.size() == 3);
  const EvalReport ev = evaluate(model, data, code, TrainMode::Class, 25.0,
                                 EvalMode::Hard, Decoder::LossBased);
  CHECK(ev.mcr_class <= 0.15);
}

TEST_CASE("cross-validation is stratified and aggregates fold results") {
  const Dataset data = generate_naval(std::vector<int>{20, 10, 10}, 19);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  TrainConfig c = quick_config(10);
  const CrossValResult res = crossvalidate(data, code, make_arch(data, code.attributes()),
                                           c, 5);
  REQUIRE(res.folds.size() == 5);
  CHECK(res.models.size() == 5);
  CHECK_FALSE(res.formulae.empty());
  double sum = 0;
  for (const FoldResult& f : res.folds) {
    CHECK(f.test_mcr >= 0.0);
    CHECK(f.test_mcr <= 1.0);
    sum += f.test_mcr;
  }
  CHECK(res.mean_test_mcr == doctest::Approx(sum / 5));

  CHECK_THROWS_AS(crossvalidate(data, code, make_arch(data, code.attributes()), c, 1),
                  std::invalid_argument);
  // More folds than members of the smallest class: some fold has no test
  // share of that class but still tests nonempty overall; far too many
  // folds leave an empty fold and are rejected.
  CHECK_THROWS_AS(crossvalidate(data, code, make_arch(data, code.attributes()), c, 41),
                  std::invalid_argument);
}

TEST_CASE("margin ablation pairs runs by seed") {
  const Dataset data = generate_naval(std::vector<int>{8, 4, 4}, 23);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  const std::vector<uint64_t> seeds{5, 6};
  const std::vector<AblationPair> pairs = margin_ablation(
      data, code, make_arch(data, code.attributes()), quick_config(60), seeds);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].seed == 5);
  CHECK(pairs[1].seed == 6);
  for (const AblationPair& p : pairs) {
    CHECK(p.with_margin >= 0.0);
    CHECK(p.without_margin >= 0.0);
  }
}

TEST_CASE("reports serialize to JSON and CSV") {
  const Dataset data = generate_naval(std::vector<int>{6, 3, 3}, 29);
  const CodingMatrix code = CodingMatrix::preset("naval-a1");
  const auto [model, report] =
      train(data, code, make_arch(data, code.attributes()), quick_config(20));

  const nlohmann::json j = nlohmann::json::parse(report.to_json_string());
  CHECK(j.at("iterations_run").get<int>() == 20);
  CHECK(j.at("formulae").size() == 2);
  CHECK(j.at("epochs").is_array());

  const std::string csv = report.epochs_csv();
  CHECK(csv.rfind("epoch,loss,mcr,mean_abs_rob\n", 0) == 0);

  const EvalReport ev = evaluate(model, data, code, TrainMode::Attribute, 25.0,
                                 EvalMode::Hard, Decoder::LossBased);
  const nlohmann::json je = nlohmann::json::parse(ev.to_json_string());
  CHECK(je.at("confusion").size() == 3);
}

TEST_CASE("evaluation accepts a taller coding matrix than the training one") {
  // Zero-shot shape: train against 4 observed rows, decode against 5.
  const Dataset data = generate_synthetic(std::vector<int>{6, 6, 6, 6, 6}, 31);
  Dataset observed;
  observed.classes = 4;
  observed.steps = data.steps;
  observed.dims = data.dims;
  for (size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] >= 4) continue;
    observed.signals.push_back(data.signals[i]);
    observed.labels.push_back(data.labels[i]);
  }
  const CodingMatrix obs = CodingMatrix::preset("zeroshot-obs");
  const auto [model, report] =
      train(observed, obs, make_arch(observed, obs.attributes()), quick_config(15));

  const CodingMatrix stacked = obs.vstack(CodingMatrix::preset("zeroshot-pred"));
  const EvalReport ev = evaluate(model, data, stacked, TrainMode::Attribute, 25.0,
                                 EvalMode::Hard, Decoder::LossBased);
  CHECK(ev.confusion.size() == 5);

  // The reverse direction is rejected.
  CHECK_THROWS_AS(evaluate(model, data, obs, TrainMode::Attribute, 25.0, EvalMode::Hard,
                           Decoder::LossBased),
                  std::invalid_argument);
}
