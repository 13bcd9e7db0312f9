// Command-line front end: dataset generation, training, evaluation,
// cross-validation, zero-shot composition, margin ablation, formula
// extraction and coding-matrix utilities.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mstl/dataset.hpp"
#include "mstl/ecoc.hpp"
#include "mstl/loss.hpp"
#include "mstl/network.hpp"
#include "mstl/parser.hpp"
#include "mstl/trainer.hpp"

namespace {

using namespace mstl;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct CodeChoice {
  std::string preset;
  std::string file;

  CodingMatrix resolve() const {
    if (!preset.empty() && !file.empty())
      throw std::runtime_error("give either --preset or --ecoc, not both");
    if (!preset.empty()) return CodingMatrix::preset(preset);
    if (!file.empty()) return CodingMatrix::load(file);
    throw std::runtime_error("a coding matrix is required (--preset or --ecoc)");
  }
};

void add_code_options(CLI::App* cmd, CodeChoice& choice) {
  cmd->add_option("--preset", choice.preset,
                  "built-in coding matrix (see `mstl ecoc --list`)");
  cmd->add_option("--ecoc", choice.file, "coding matrix JSON file");
}

struct TrainOptions {
  TrainConfig config;
  int rows = 3;
  int templates = 8;
  bool affine = false;
  std::string mode = "attribute";

  TrainMode train_mode() const {
    if (mode == "attribute") return TrainMode::Attribute;
    if (mode == "class") return TrainMode::Class;
    throw std::runtime_error("--mode must be attribute or class");
  }
  ArchConfig arch(const Dataset& data, int attributes) const {
    return make_arch(data, attributes, rows, templates,
                     affine ? PredicateMode::Affine : PredicateMode::Axis);
  }
  TrainConfig resolve() const {
    TrainConfig c = config;
    c.mode = train_mode();
    return c;
  }
};

void add_train_options(CLI::App* cmd, TrainOptions& opt) {
  cmd->add_option("--mode", opt.mode, "attribute | class")->capture_default_str();
  cmd->add_option("--iterations", opt.config.iterations, "gradient steps")
      ->capture_default_str();
  cmd->add_option("--batch", opt.config.batch, "minibatch size")->capture_default_str();
  cmd->add_option("--lr", opt.config.lr, "Adam step size")->capture_default_str();
  cmd->add_option("--delta", opt.config.delta, "margin bonus weight")->capture_default_str();
  cmd->add_option("--beta-lo", opt.config.beta_lo, "smoothing temperature, first half")
      ->capture_default_str();
  cmd->add_option("--beta-hi", opt.config.beta_hi, "smoothing temperature, second half")
      ->capture_default_str();
  cmd->add_option("--seed", opt.config.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--patience", opt.config.patience,
                  "epochs without improvement before early stop (0 = never)")
      ->capture_default_str();
  cmd->add_option("--restarts", opt.config.restarts,
                  "independent runs; the best binarized train MCR wins")
      ->capture_default_str();
  cmd->add_flag_callback("--no-margin", [&opt] { opt.config.use_margin = false; },
                         "train with a plain hinge instead of the margin loss");
  cmd->add_option("--rows", opt.rows, "conjunction rows per attribute")->capture_default_str();
  cmd->add_option("--templates", opt.templates, "shared template pool size")
      ->capture_default_str();
  cmd->add_flag("--affine", opt.affine, "learn affine predicates instead of axis-aligned");
}

Decoder parse_decoder(const std::string& name) {
  if (name == "loss") return Decoder::LossBased;
  if (name == "hamming") return Decoder::Hamming;
  throw std::runtime_error("--decode must be loss or hamming");
}

EvalMode parse_semantics(const std::string& name) {
  if (name == "hard") return EvalMode::Hard;
  if (name == "soft") return EvalMode::SoftBinarized;
  if (name == "relaxed") return EvalMode::Relaxed;
  throw std::runtime_error("--semantics must be hard, soft or relaxed");
}

void print_formulae(const std::vector<std::string>& formulae) {
  for (size_t k = 0; k < formulae.size(); ++k)
    std::cout << "  phi_" << k + 1 << " = " << formulae[k] << "\n";
}

int cmd_generate(const std::string& scenario, const std::vector<int>& counts, uint64_t seed,
                 const std::string& out_dir, std::string name) {
  if (name.empty()) name = scenario;
  Dataset data;
  if (scenario == "naval")
    data = generate_naval(counts, seed);
  else if (scenario == "synthetic")
    data = generate_synthetic(counts, seed);
  else
    throw std::runtime_error("--scenario must be naval or synthetic");
  const std::string manifest = save_dataset(data, out_dir, name, scenario, seed);
  std::cout << "wrote " << data.size() << " signals (" << data.classes << " classes, T="
            << data.steps << ", d=" << data.dims << ") to " << manifest << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, const CodeChoice& choice, const TrainOptions& opt,
              const std::string& model_out, const std::string& report_out,
              const std::string& epochs_csv) {
  const Dataset data = load_dataset(data_path);
  const CodingMatrix code = choice.resolve();
  const auto [model, report] =
      train(data, code, opt.arch(data, code.attributes()), opt.resolve());

  std::cout << "trained " << report.iterations_run << " iterations in " << report.wall_seconds
            << " s; final train MCR " << report.final_train_mcr << "\n";
  print_formulae(report.formulae);
  if (!model_out.empty()) {
    model.save(model_out);
    std::cout << "model -> " << model_out << "\n";
  }
  if (!report_out.empty()) write_text(report_out, report.to_json_string() + "\n");
  if (!epochs_csv.empty()) write_text(epochs_csv, report.epochs_csv());
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const CodeChoice& choice, const std::string& mode, const std::string& decode,
             const std::string& semantics, double beta, const std::string& report_out) {
  const ModelParams model = ModelParams::load(model_path);
  const Dataset data = load_dataset(data_path);
  const CodingMatrix code = choice.resolve();
  TrainOptions opt;
  opt.mode = mode;
  const EvalReport rep = evaluate(model, data, code, opt.train_mode(), beta,
                                  parse_semantics(semantics), parse_decoder(decode));
  std::cout << "class MCR " << rep.mcr_class << "; attribute MCR " << rep.mcr_attribute
            << "\nconfusion (rows true, cols predicted):\n";
  for (const auto& row : rep.confusion) {
    for (const int v : row) std::cout << "  " << v;
    std::cout << "\n";
  }
  if (!report_out.empty()) write_text(report_out, rep.to_json_string() + "\n");
  return 0;
}

int cmd_crossval(const std::string& data_path, const CodeChoice& choice,
                 const TrainOptions& opt, int folds, const std::string& report_out) {
  const Dataset data = load_dataset(data_path);
  const CodingMatrix code = choice.resolve();
  const CrossValResult res =
      crossvalidate(data, code, opt.arch(data, code.attributes()), opt.resolve(), folds);
  for (size_t f = 0; f < res.folds.size(); ++f)
    std::cout << "fold " << f + 1 << ": train MCR " << res.folds[f].train_mcr << ", test MCR "
              << res.folds[f].test_mcr << " (" << res.folds[f].wall_seconds << " s)\n";
  std::cout << "mean test MCR " << res.mean_test_mcr << "\nfirst-fold formulae:\n";
  print_formulae(res.formulae);
  if (!report_out.empty()) write_text(report_out, res.to_json_string() + "\n");
  return 0;
}

// Trains attribute formulae on the observed classes only, then decodes the
// full dataset (including the held-out class) against the vertically
// stacked observed+predicted coding matrix.
int cmd_zeroshot(const std::string& data_path, const TrainOptions& opt,
                 const std::string& obs_file, const std::string& pred_file,
                 const std::string& model_out, const std::string& report_out) {
  const Dataset data = load_dataset(data_path);
  const CodingMatrix observed =
      obs_file.empty() ? CodingMatrix::preset("zeroshot-obs") : CodingMatrix::load(obs_file);
  const CodingMatrix pred =
      pred_file.empty() ? CodingMatrix::preset("zeroshot-pred") : CodingMatrix::load(pred_file);
  if (pred.attributes() != observed.attributes())
    throw std::runtime_error("predicted codewords must have the observed column count");
  if (data.classes != observed.classes() + pred.classes())
    throw std::runtime_error("dataset must have one class per observed and predicted row");

  Dataset train_set;
  train_set.classes = observed.classes();
  train_set.steps = data.steps;
  train_set.dims = data.dims;
  for (size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] >= observed.classes()) continue;
    train_set.signals.push_back(data.signals[i]);
    train_set.labels.push_back(data.labels[i]);
  }

  TrainOptions fixed = opt;
  fixed.mode = "attribute";
  const auto [model, report] = train(train_set, observed,
                                     fixed.arch(train_set, observed.attributes()),
                                     fixed.resolve());
  std::cout << "trained on " << train_set.size() << " samples of " << observed.classes()
            << " observed classes (" << report.wall_seconds << " s)\n";
  print_formulae(report.formulae);
  if (!model_out.empty()) model.save(model_out);

  // A predicted codeword that repeats an observed one decodes to the
  // observed class by construction; nothing unseen is being recognized.
  for (int j = 0; j < pred.classes(); ++j)
    for (int i = 0; i < observed.classes(); ++i) {
      bool same = true;
      for (int k = 0; k < pred.attributes() && same; ++k)
        same = pred.entry(j, k) == observed.entry(i, k);
      if (same) {
        std::cout << "warning: predicted codeword " << j + 1 << " equals observed codeword "
                  << i + 1 << "; this is not zero-shot, skipping the decode\n";
        return 0;
      }
    }

  const CodingMatrix stacked = observed.vstack(pred);
  const EvalReport all = evaluate(model, data, stacked, TrainMode::Attribute,
                                  fixed.config.beta_hi, EvalMode::Hard, Decoder::LossBased);
  Dataset held;
  held.classes = data.classes;
  held.steps = data.steps;
  held.dims = data.dims;
  for (size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] < observed.classes()) continue;
    held.signals.push_back(data.signals[i]);
    held.labels.push_back(data.labels[i]);
  }
  const EvalReport unseen = evaluate(model, held, stacked, TrainMode::Attribute,
                                     fixed.config.beta_hi, EvalMode::Hard, Decoder::LossBased);
  std::cout << "all-class MCR " << all.mcr_class << "; held-out class MCR " << unseen.mcr_class
            << " over " << held.size() << " samples\n";
  if (!report_out.empty()) write_text(report_out, all.to_json_string() + "\n");
  return 0;
}

int cmd_ablate(const std::string& data_path, const CodeChoice& choice, const TrainOptions& opt,
               const std::vector<uint64_t>& seeds) {
  const Dataset data = load_dataset(data_path);
  const CodingMatrix code = choice.resolve();
  const std::vector<AblationPair> pairs =
      margin_ablation(data, code, opt.arch(data, code.attributes()), opt.resolve(), seeds);
  double with = 0, without = 0;
  for (const AblationPair& p : pairs) {
    std::cout << "seed " << p.seed << ": mean |robustness| " << p.with_margin
              << " with margin, " << p.without_margin << " without\n";
    with += p.with_margin;
    without += p.without_margin;
  }
  with /= static_cast<double>(pairs.size());
  without /= static_cast<double>(pairs.size());
  std::cout << "mean over seeds: " << with << " with margin, " << without << " without\n";
  return 0;
}

int cmd_extract(const std::string& model_path, int precision) {
  const ModelParams model = ModelParams::load(model_path);
  std::vector<std::string> printed;
  for (const FormulaPtr& f : extract_formulae(model))
    printed.push_back(print_formula(*f, precision));
  print_formulae(printed);
  return 0;
}

int cmd_ecoc(const std::string& preset, int onehot, bool list, bool do_validate,
             const std::string& out) {
  if (list) {
    for (const std::string& name : CodingMatrix::preset_names()) std::cout << name << "\n";
    return 0;
  }
  if (preset.empty() == (onehot == 0))
    throw std::runtime_error("give exactly one of --preset or --onehot");
  const CodingMatrix code =
      preset.empty() ? CodingMatrix::one_hot(onehot) : CodingMatrix::preset(preset);
  std::cout << code.classes() << " classes x " << code.attributes()
            << " attributes (usable bound " << max_usable_columns(code.classes()) << ")\n";
  for (int j = 0; j < code.classes(); ++j) {
    for (int k = 0; k < code.attributes(); ++k)
      std::cout << (code.entry(j, k) > 0 ? " +1" : " -1");
    std::cout << "\n";
  }
  if (do_validate) {
    const EcocValidation v = code.validate();
    std::cout << "min row Hamming distance " << v.min_row_hamming << "\n";
    if (!v.within_usable_bound) std::cout << "warning: more columns than usable bound\n";
    for (const std::string& w : v.warnings) std::cout << "warning: " << w << "\n";
  }
  if (!out.empty()) {
    code.save(out);
    std::cout << "matrix -> " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal-logic classifier: trains and evaluates interpretable "
               "signal-temporal-logic formulae for multi-class time series"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a labeled dataset");
  std::string scenario, gen_out = ".", gen_name;
  std::vector<int> counts;
  uint64_t gen_seed = 1;
  gen->add_option("--scenario", scenario, "naval | synthetic")->required();
  gen->add_option("--counts", counts, "samples per class, comma separated")
      ->required()
      ->delimiter(',');
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();
  gen->add_option("--name", gen_name, "file stem (default: scenario)");

  // train
  auto* tr = app.add_subcommand("train", "fit a model and extract its formulae");
  std::string tr_data, tr_model_out, tr_report_out, tr_epochs_csv;
  CodeChoice tr_code;
  TrainOptions tr_opt;
  tr->add_option("--data", tr_data, "dataset manifest JSON")->required();
  add_code_options(tr, tr_code);
  add_train_options(tr, tr_opt);
  tr->add_option("--model-out", tr_model_out, "write the trained model JSON here");
  tr->add_option("--report-out", tr_report_out, "write the training report JSON here");
  tr->add_option("--epochs-csv", tr_epochs_csv, "write per-epoch stats CSV here");

  // eval
  auto* ev = app.add_subcommand("eval", "score a trained model on a dataset");
  std::string ev_model, ev_data, ev_mode = "attribute", ev_decode = "loss",
              ev_semantics = "hard", ev_report_out;
  CodeChoice ev_code;
  double ev_beta = 25.0;
  ev->add_option("--model", ev_model, "model JSON")->required();
  ev->add_option("--data", ev_data, "dataset manifest JSON")->required();
  add_code_options(ev, ev_code);
  ev->add_option("--mode", ev_mode, "attribute | class")->capture_default_str();
  ev->add_option("--decode", ev_decode, "loss | hamming")->capture_default_str();
  ev->add_option("--semantics", ev_semantics, "hard | soft | relaxed")->capture_default_str();
  ev->add_option("--beta", ev_beta, "temperature for soft/relaxed semantics")
      ->capture_default_str();
  ev->add_option("--report-out", ev_report_out, "write the evaluation JSON here");

  // crossval
  auto* cv = app.add_subcommand("crossval", "stratified k-fold cross-validation");
  std::string cv_data, cv_report_out;
  CodeChoice cv_code;
  TrainOptions cv_opt;
  int cv_folds = 5;
  cv->add_option("--data", cv_data, "dataset manifest JSON")->required();
  add_code_options(cv, cv_code);
  add_train_options(cv, cv_opt);
  cv->add_option("--folds", cv_folds, "fold count")->capture_default_str();
  cv->add_option("--report-out", cv_report_out, "write the fold results JSON here");

  // zeroshot
  auto* zs = app.add_subcommand(
      "zeroshot", "train on observed classes, decode a composed unseen class");
  std::string zs_data, zs_obs, zs_pred, zs_model_out, zs_report_out;
  TrainOptions zs_opt;
  zs->add_option("--data", zs_data, "dataset manifest with the predicted classes last")->required();
  add_train_options(zs, zs_opt);
  zs->add_option("--obs", zs_obs, "observed-class coding matrix JSON (default: zeroshot-obs)");
  zs->add_option("--pred", zs_pred, "predicted-codeword matrix JSON (default: zeroshot-pred)");
  zs->add_option("--model-out", zs_model_out, "write the trained model JSON here");
  zs->add_option("--report-out", zs_report_out, "write the evaluation JSON here");

  // ablate-margin
  auto* ab = app.add_subcommand("ablate-margin",
                                "paired runs with and without the margin terms");
  std::string ab_data;
  CodeChoice ab_code;
  TrainOptions ab_opt;
  std::vector<uint64_t> ab_seeds{1, 2, 3};
  ab->add_option("--data", ab_data, "dataset manifest JSON")->required();
  add_code_options(ab, ab_code);
  add_train_options(ab, ab_opt);
  ab->add_option("--seeds", ab_seeds, "seeds, comma separated")
      ->delimiter(',')
      ->capture_default_str();

  // extract
  auto* ex = app.add_subcommand("extract", "print a model's formulae");
  std::string ex_model;
  int ex_precision = -1;
  ex->add_option("--model", ex_model, "model JSON")->required();
  ex->add_option("--precision", ex_precision,
                 "decimal places; negative = shortest exact form")
      ->capture_default_str();

  // ecoc
  auto* ec = app.add_subcommand("ecoc", "inspect or export coding matrices");
  std::string ec_preset, ec_out;
  int ec_onehot = 0;
  bool ec_list = false, ec_validate = false;
  ec->add_option("--preset", ec_preset, "built-in matrix name");
  ec->add_option("--onehot", ec_onehot, "build a one-hot table for this many classes");
  ec->add_flag("--list", ec_list, "list preset names");
  ec->add_flag("--validate", ec_validate, "report separation diagnostics");
  ec->add_option("--out", ec_out, "write the matrix JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(scenario, counts, gen_seed, gen_out, gen_name);
    if (tr->parsed())
      return cmd_train(tr_data, tr_code, tr_opt, tr_model_out, tr_report_out, tr_epochs_csv);
    if (ev->parsed())
      return cmd_eval(ev_model, ev_data, ev_code, ev_mode, ev_decode, ev_semantics, ev_beta,
                      ev_report_out);
    if (cv->parsed()) return cmd_crossval(cv_data, cv_code, cv_opt, cv_folds, cv_report_out);
    if (zs->parsed())
      return cmd_zeroshot(zs_data, zs_opt, zs_obs, zs_pred, zs_model_out, zs_report_out);
    if (ab->parsed()) return cmd_ablate(ab_data, ab_code, ab_opt, ab_seeds);
    if (ex->parsed()) return cmd_extract(ex_model, ex_precision);
    if (ec->parsed()) return cmd_ecoc(ec_preset, ec_onehot, ec_list, ec_validate, ec_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
