#include "mstl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mstl/ecoc.hpp"
#include "mstl/parser.hpp"

namespace mstl {

using nlohmann::json;

void Dataset::check() const {
  if (signals.size() != labels.size())
    throw std::invalid_argument("dataset: signal/label count mismatch");
  if (classes < 1) throw std::invalid_argument("dataset: needs at least one class");
  for (const int y : labels)
    if (y < 0 || y >= classes) throw std::invalid_argument("dataset: label out of range");
  for (const Signal& s : signals)
    if (s.steps() != steps || s.dim() != dims)
      throw std::invalid_argument("dataset: inconsistent signal shape");
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent stream per (class, sample, attempt) so regeneration is stable
// under any per-class count.
std::mt19937_64 sample_rng(uint64_t seed, int cls, int idx, int attempt) {
  uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<uint64_t>(cls + 1));
  h = splitmix64(h ^ static_cast<uint64_t>(idx + 1));
  h = splitmix64(h ^ static_cast<uint64_t>(attempt + 1));
  return std::mt19937_64(h);
}

struct Wp {
  double o, x, y;
};
struct BoxClamp {
  int o1, o2;
  double xlo, xhi, ylo, yhi;
};

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// Piecewise-linear waypoint track with per-step jitter, then box clamps.
// low_y_guard keeps the track out of the lower-left quadrant region by
// pushing x right whenever y dips low.
Signal render_track(int steps, std::span<const Wp> wps, std::span<const BoxClamp> clamps,
                    double jitter, std::mt19937_64& rng, bool low_y_guard) {
  Signal s(steps, 2);
  size_t seg = 0;
  for (int o = 0; o < steps; ++o) {
    while (seg + 2 < wps.size() && wps[seg + 1].o < o) ++seg;
    const Wp& a = wps[seg];
    const Wp& b = wps[seg + 1];
    const double u = b.o > a.o ? std::clamp((o - a.o) / (b.o - a.o), 0.0, 1.0) : 0.0;
    double x = a.x + u * (b.x - a.x) + uniform(rng, -jitter, jitter);
    double y = a.y + u * (b.y - a.y) + uniform(rng, -jitter, jitter);
    for (const BoxClamp& c : clamps)
      if (o >= c.o1 && o <= c.o2) {
        x = std::clamp(x, c.xlo, c.xhi);
        y = std::clamp(y, c.ylo, c.yhi);
      }
    if (low_y_guard && y < -2.5) x = std::max(x, 4.0);
    s.at(o + 1, 0) = x;
    s.at(o + 1, 1) = y;
  }
  return s;
}

constexpr int kNavalSteps = 60;
constexpr int kSyntheticSteps = 41;

// One vessel track; cls is 0-based.
Signal naval_track(int cls, std::mt19937_64& rng) {
  std::vector<Wp> wps;
  std::vector<BoxClamp> clamps;
  const double x0 = uniform(rng, 52, 66);
  switch (cls) {
    case 0: {  // straight to the harbor, staying north
      const double y0 = uniform(rng, 29, 43);
      const double t1 = uniform(rng, 13, 19), t2 = uniform(rng, 26, 30);
      wps = {{0, x0, y0},
             {t1, uniform(rng, 36, 44), std::clamp(y0 + uniform(rng, -4, 4), 28.0, 44.0)},
             {t2, uniform(rng, 16, 21), uniform(rng, 34, 44)},
             {59, uniform(rng, 8, 16), uniform(rng, 34, 46)}};
      clamps = {{0, 59, 1, 69, 27, 69}, {31, 59, 1, 22, 27, 69}};
      break;
    }
    case 1: {  // detour to the island, then the harbor
      const double td = uniform(rng, 19, 27);
      const int tdi = static_cast<int>(td);
      wps = {{0, x0, uniform(rng, 24, 34)},
             {td, uniform(rng, 28, 33), uniform(rng, 14, 18)},
             {uniform(rng, 41, 45), uniform(rng, 28, 33), uniform(rng, 30, 40)},
             {59, uniform(rng, 12, 20), uniform(rng, 36, 46)}};
      clamps = {{0, 59, 1, 69, 1, 69},
                {0, 39, 28, 69, 1, 69},
                {tdi - 1, tdi + 1, 28, 69, 1, 18.5},
                {54, 59, 1, 22, 1, 69}};
      break;
    }
    case 2: {  // open sea the whole time
      wps = {{0, x0, uniform(rng, 29, 43)},
             {uniform(rng, 17, 23), uniform(rng, 44, 58), uniform(rng, 28, 44)},
             {uniform(rng, 37, 43), uniform(rng, 42, 60), uniform(rng, 28, 44)},
             {59, uniform(rng, 40, 62), uniform(rng, 29, 45)}};
      clamps = {{0, 59, 38, 69, 27, 69}};
      break;
    }
    default:
      throw std::invalid_argument("naval: class out of range");
  }
  return render_track(kNavalSteps, wps, clamps, 0.4, rng, false);
}

Wp home(std::mt19937_64& rng, double o) {
  return {o, uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
}

constexpr BoxClamp home_clamp(int o1, int o2) { return {o1, o2, -1.4, 1.4, -1.4, 1.4}; }
// Safe interiors of the four regions.
Wp r1(std::mt19937_64& rng, double o) { return {o, uniform(rng, 3.5, 4.5), uniform(rng, 4.5, 5.5)}; }
Wp r2(std::mt19937_64& rng, double o) { return {o, uniform(rng, -3.5, -2.5), uniform(rng, 3.5, 4.5)}; }
Wp r3(std::mt19937_64& rng, double o) { return {o, uniform(rng, 5.5, 6.5), uniform(rng, -4.5, -3.5)}; }
Wp r4(std::mt19937_64& rng, double o) { return {o, uniform(rng, -4.5, -3.5), uniform(rng, -4.5, -3.5)}; }
constexpr BoxClamp r1_clamp(int o1, int o2) { return {o1, o2, 3.5, 4.5, 4.5, 5.5}; }
constexpr BoxClamp r2_clamp(int o1, int o2) { return {o1, o2, -3.5, -2.5, 3.5, 4.5}; }
constexpr BoxClamp r3_clamp(int o1, int o2) { return {o1, o2, 5.5, 6.5, -4.5, -3.5}; }
constexpr BoxClamp r4_clamp(int o1, int o2) { return {o1, o2, -4.5, -3.5, -4.5, -3.5}; }

Signal synthetic_track(int cls, std::mt19937_64& rng) {
  std::vector<Wp> wps;
  std::vector<BoxClamp> clamps;
  bool guard = false;
  switch (cls) {
    case 0: {  // early first-region visit, then hold the northwest box
      wps = {home(rng, 0), r1(rng, 4), r1(rng, 6), home(rng, 9),
             home(rng, 24), r2(rng, 29), r2(rng, 40)};
      clamps = {home_clamp(0, 2), r1_clamp(4, 6), home_clamp(9, 24), r2_clamp(29, 40)};
      break;
    }
    case 1: {  // first region, then the southeast box, home at the end
      const double t3 = uniform(rng, 17, 20);
      const int t3i = static_cast<int>(t3);
      wps = {home(rng, 0), r1(rng, 4), r1(rng, 6), home(rng, 10), home(rng, 13),
             r3(rng, t3), r3(rng, t3 + 2), home(rng, 26), home(rng, 40)};
      clamps = {home_clamp(0, 2), r1_clamp(4, 6), home_clamp(10, 13),
                r3_clamp(t3i, t3i + 2), home_clamp(26, 40)};
      guard = true;
      break;
    }
    case 2: {  // southeast box, then hold the northwest box
      const double t3 = uniform(rng, 15, 18);
      const int t3i = static_cast<int>(t3);
      wps = {home(rng, 0), home(rng, 11), r3(rng, t3), r3(rng, t3 + 2),
             r2(rng, 29), r2(rng, 40)};
      clamps = {home_clamp(0, 11), r3_clamp(t3i, t3i + 2), r2_clamp(29, 40)};
      guard = true;
      break;
    }
    case 3: {  // hold the southwest box mid-track, home otherwise
      wps = {home(rng, 0), home(rng, 16), r4(rng, 19), r4(rng, 22),
             home(rng, 26), home(rng, 40)};
      clamps = {home_clamp(0, 16), r4_clamp(19, 22), home_clamp(26, 40)};
      break;
    }
    case 4: {  // home, then hold the northwest box
      wps = {home(rng, 0), home(rng, 24), r2(rng, 29), r2(rng, 40)};
      clamps = {home_clamp(0, 24), r2_clamp(29, 40)};
      break;
    }
    default:
      throw std::invalid_argument("synthetic: class out of range");
  }
  return render_track(kSyntheticSteps, wps, clamps, 0.25, rng, guard);
}

Dataset generate(std::span<const int> counts, uint64_t seed, int classes, int steps,
                 Signal (*track)(int, std::mt19937_64&), std::vector<FormulaPtr> truth) {
  if (counts.size() != static_cast<size_t>(classes))
    throw std::invalid_argument("generate: one count per class required");
  Dataset d;
  d.classes = classes;
  d.steps = steps;
  d.dims = 2;
  for (int cls = 0; cls < classes; ++cls) {
    if (counts[cls] < 0) throw std::invalid_argument("generate: negative count");
    for (int i = 0; i < counts[cls]; ++i) {
      bool ok = false;
      for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
        std::mt19937_64 rng = sample_rng(seed, cls, i, attempt);
        Signal s = track(cls, rng);
        if (verify_sample(s, cls, truth)) {
          d.signals.push_back(std::move(s));
          d.labels.push_back(cls);
          ok = true;
        }
      }
      if (!ok)
        throw std::runtime_error("generate: could not produce a valid sample for class " +
                                 std::to_string(cls + 1));
    }
  }
  return d;
}

}  // namespace

std::vector<FormulaPtr> naval_truth() {
  return {parse_formula("F[0,59](x <= 25) & G[0,59](y >= 24)"),
          parse_formula("F[0,59](x <= 25) & F[0,59](y <= 22)"),
          parse_formula("G[0,59](x >= 34)")};
}

Dataset generate_naval(std::span<const int> counts, uint64_t seed) {
  return generate(counts, seed, 3, kNavalSteps, naval_track, naval_truth());
}

std::vector<FormulaPtr> synthetic_regions() {
  return {parse_formula("F[0,10](x >= 3 & x <= 5 & y >= 4 & y <= 6)"),
          parse_formula("G[30,40](x >= -4 & x <= -2 & y >= 3 & y <= 5)"),
          parse_formula("F[10,40](x >= 5 & x <= 7 & y >= -5 & y <= -3)"),
          parse_formula("F[10,40](x >= -5 & x <= -3 & y >= -5 & y <= -3)")};
}

std::vector<FormulaPtr> synthetic_truth() {
  const CodingMatrix code = CodingMatrix::preset("synthetic");
  const std::vector<FormulaPtr> regions = synthetic_regions();
  std::vector<FormulaPtr> out;
  for (int j = 0; j < code.classes(); ++j) out.push_back(class_decoder(code, j, regions));
  return out;
}

Dataset generate_synthetic(std::span<const int> counts, uint64_t seed) {
  return generate(counts, seed, 5, kSyntheticSteps, synthetic_track, synthetic_truth());
}

bool verify_sample(const Signal& s, int label, std::span<const FormulaPtr> truth) {
  if (label < 0 || static_cast<size_t>(label) >= truth.size())
    throw std::invalid_argument("verify_sample: label out of range");
  for (size_t j = 0; j < truth.size(); ++j) {
    const double r = robustness(truth[j], s, 1);
    if (static_cast<int>(j) == label ? r <= 0 : r > 0) return false;
  }
  return true;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

double parse_double(const std::string& tok, int line_no) {
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, int line_no) {
  int v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad integer '" + tok + "'");
  return v;
}

}  // namespace

std::string save_dataset(const Dataset& data, const std::string& dir, const std::string& name,
                         const std::string& kind, uint64_t seed) {
  data.check();
  std::filesystem::create_directories(dir);
  const std::string signals_csv = name + "_signals.csv";
  const std::string labels_csv = name + "_labels.csv";

  {
    std::ofstream out(dir + "/" + signals_csv);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + signals_csv);
    out << "signal_id,time";
    for (int k = 0; k < data.dims; ++k) out << ",x" << k + 1;
    out << '\n';
    for (size_t i = 0; i < data.signals.size(); ++i)
      for (int tau = 1; tau <= data.steps; ++tau) {
        out << i + 1 << ',' << tau;
        for (int k = 0; k < data.dims; ++k) out << ',' << shortest(data.signals[i].at(tau, k));
        out << '\n';
      }
  }
  {
    std::ofstream out(dir + "/" + labels_csv);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + labels_csv);
    out << "signal_id,class\n";
    for (size_t i = 0; i < data.labels.size(); ++i)
      out << i + 1 << ',' << data.labels[i] + 1 << '\n';
  }

  std::vector<int> counts(data.classes, 0);
  for (const int y : data.labels) ++counts[y];
  json manifest;
  manifest["name"] = name;
  manifest["kind"] = kind;
  manifest["seed"] = seed;
  manifest["classes"] = data.classes;
  manifest["steps"] = data.steps;
  manifest["dims"] = data.dims;
  manifest["counts"] = counts;
  manifest["signals_csv"] = signals_csv;
  manifest["labels_csv"] = labels_csv;

  const std::string manifest_path = dir + "/" + name + "_manifest.json";
  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("cannot write " + manifest_path);
  out << manifest.dump(2) << '\n';
  return manifest_path;
}

Dataset load_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open for reading: " + manifest_path);
  json manifest;
  in >> manifest;

  Dataset d;
  d.classes = manifest.at("classes").get<int>();
  d.steps = manifest.at("steps").get<int>();
  d.dims = manifest.at("dims").get<int>();
  const auto dir = std::filesystem::path(manifest_path).parent_path();

  // signal id -> per-time rows; times must come out contiguous from 1.
  std::map<int, std::vector<std::pair<int, std::vector<double>>>> rows;
  {
    std::ifstream csv(dir / manifest.at("signals_csv").get<std::string>());
    if (!csv) throw std::runtime_error("cannot open signals csv");
    std::string line;
    std::getline(csv, line);  // header
    int line_no = 1;
    while (std::getline(csv, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto toks = split_csv_line(line);
      if (toks.size() != static_cast<size_t>(d.dims) + 2)
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": wrong column count");
      const int id = parse_int(toks[0], line_no);
      const int tau = parse_int(toks[1], line_no);
      std::vector<double> vals(d.dims);
      for (int k = 0; k < d.dims; ++k) vals[k] = parse_double(toks[2 + k], line_no);
      rows[id].emplace_back(tau, std::move(vals));
    }
  }

  std::map<int, int> label_of;
  {
    std::ifstream csv(dir / manifest.at("labels_csv").get<std::string>());
    if (!csv) throw std::runtime_error("cannot open labels csv");
    std::string line;
    std::getline(csv, line);  // header
    int line_no = 1;
    while (std::getline(csv, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto toks = split_csv_line(line);
      if (toks.size() != 2)
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": wrong column count");
      const int cls = parse_int(toks[1], line_no);
      if (cls < 1 || cls > d.classes)
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": class out of range");
      if (!label_of.emplace(parse_int(toks[0], line_no), cls - 1).second)
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": duplicate signal id");
    }
  }

  if (rows.size() != label_of.size())
    throw std::runtime_error("dataset: signals csv and labels csv disagree on signal ids");
  for (auto& [id, series] : rows) {
    const auto lab = label_of.find(id);
    if (lab == label_of.end())
      throw std::runtime_error("dataset: signal " + std::to_string(id) + " has no label");
    std::sort(series.begin(), series.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (static_cast<int>(series.size()) != d.steps)
      throw std::runtime_error("dataset: signal " + std::to_string(id) + " has wrong length");
    Signal s(d.steps, d.dims);
    for (int tau = 1; tau <= d.steps; ++tau) {
      if (series[tau - 1].first != tau)
        throw std::runtime_error("dataset: signal " + std::to_string(id) +
                                 " times are not contiguous from 1");
      for (int k = 0; k < d.dims; ++k) s.at(tau, k) = series[tau - 1].second[k];
    }
    d.signals.push_back(std::move(s));
    d.labels.push_back(lab->second);
  }
  d.check();
  return d;
}

}  // namespace mstl
