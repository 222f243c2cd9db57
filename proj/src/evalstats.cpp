#include "keystage/evalstats.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "keystage/dataset.hpp"
#include "keystage/errors.hpp"

namespace keystage::evalstats {

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta: continued fraction did not converge");
}

double parse_number(const std::string& s, const std::string& where, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + column + " is not a number: '" + s + "'");
  }
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x < (a+1)/(a+b+2); use the symmetry
  // I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isnan(t)) throw ValidationError("t is NaN");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("paired t-test: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + " values");
  }
  if (a.size() < 2) throw DimensionError("paired t-test needs at least two pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);
  // Differences that are all equal (up to rounding) leave t undefined.
  const double scale = std::max(1.0, std::abs(mean));
  if (!(var > 1e-24 * scale * scale)) {
    throw DegenerateInputError("paired t-test: the differences have zero variance");
  }
  TTestResult r;
  r.df = a.size() - 1;
  r.mean_difference = mean;
  r.t = mean / std::sqrt(var / n);
  const double tail = 0.5 * incomplete_beta(static_cast<double>(r.df) / 2.0, 0.5,
                                            static_cast<double>(r.df) /
                                                (static_cast<double>(r.df) + r.t * r.t));
  r.p = std::min(1.0, 2.0 * tail);
  return r;
}

bool dominates(const ModelResult& a, const ModelResult& b) {
  return a.f1 >= b.f1 && a.inference_time_s <= b.inference_time_s &&
         (a.f1 > b.f1 || a.inference_time_s < b.inference_time_s);
}

std::vector<std::size_t> pareto_front(std::span<const ModelResult> results) {
  // Sweep by time ascending (F1 descending within a time); a point is on the
  // front when its F1 beats everything strictly faster, and matches the best
  // F1 within its own time group.
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (results[i].inference_time_s != results[j].inference_time_s) {
      return results[i].inference_time_s < results[j].inference_time_s;
    }
    return results[i].f1 > results[j].f1;
  });
  std::vector<bool> on_front(results.size(), false);
  double best_faster = -std::numeric_limits<double>::infinity();
  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t h = g;
    while (h < order.size() &&
           results[order[h]].inference_time_s == results[order[g]].inference_time_s) {
      ++h;
    }
    const double group_best = results[order[g]].f1;
    for (std::size_t k = g; k < h; ++k) {
      const double f = results[order[k]].f1;
      on_front[order[k]] = f == group_best && f > best_faster;
    }
    best_faster = std::max(best_faster, group_best);
    g = h;
  }
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (on_front[i]) front.push_back(i);
  }
  return front;
}

std::vector<ModelResult> read_results_csv(std::istream& in, const std::string& source) {
  const auto records = dataset::read_csv(in);
  if (records.empty()) throw ValidationError(source + ": empty results file");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].fields.size(); ++i) {
    col[records[0].fields[i]] = i;
  }
  for (const char* required :
       {"name", "accuracy", "precision", "recall", "f1", "parameters", "inference_time_s"}) {
    if (!col.contains(required)) {
      throw ValidationError(source + ": missing column '" + required + "'");
    }
  }
  std::vector<ModelResult> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const std::string where = source + ":" + std::to_string(records[r].line) + ": ";
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() < records[0].fields.size()) throw ValidationError(where + "too few fields");
    ModelResult m;
    m.name = f[col["name"]];
    m.accuracy = parse_number(f[col["accuracy"]], where, "accuracy");
    m.precision = parse_number(f[col["precision"]], where, "precision");
    m.recall = parse_number(f[col["recall"]], where, "recall");
    m.f1 = parse_number(f[col["f1"]], where, "f1");
    const double params = parse_number(f[col["parameters"]], where, "parameters");
    if (params < 0 || params != std::floor(params)) {
      throw ValidationError(where + "parameters must be a non-negative integer");
    }
    m.parameters = static_cast<long long>(params);
    m.inference_time_s = parse_number(f[col["inference_time_s"]], where, "inference_time_s");
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      if (v < 0.0 || v > 1.0) throw ValidationError(where + "metrics must lie in [0, 1]");
    }
    if (!(m.inference_time_s > 0.0)) throw ValidationError(where + "inference time must be > 0");
    if (col.contains("modality")) {
      m.modality = f[col["modality"]];
      if (!m.modality.empty() && m.modality != "unimodal" && m.modality != "multimodal") {
        throw ValidationError(where + "modality must be unimodal or multimodal");
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ModelResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open results " + path.string());
  return read_results_csv(in, path.string());
}

Comparison compare(std::span<const ModelResult> results) {
  Comparison c;
  c.front = pareto_front(results);
  std::vector<const ModelResult*> uni;
  std::vector<const ModelResult*> multi;
  for (const auto& r : results) {
    if (r.modality == "unimodal") uni.push_back(&r);
    if (r.modality == "multimodal") multi.push_back(&r);
  }
  if (uni.empty() && multi.empty()) {
    c.warnings.push_back("no modality column; paired t-tests skipped");
    return c;
  }
  if (uni.size() != multi.size() || uni.size() < 2) {
    c.warnings.push_back("paired t-tests need equal unimodal and multimodal counts (at least 2)");
    return c;
  }
  const std::vector<std::pair<std::string, double ModelResult::*>> metrics = {
      {"accuracy", &ModelResult::accuracy},
      {"precision", &ModelResult::precision},
      {"recall", &ModelResult::recall},
      {"f1", &ModelResult::f1},
      {"inference_time_s", &ModelResult::inference_time_s}};
  for (const auto& [name, field] : metrics) {
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < uni.size(); ++i) {
      a.push_back(multi[i]->*field);
      b.push_back(uni[i]->*field);
    }
    try {
      c.tests.push_back({name, paired_t_test(a, b)});
    } catch (const DegenerateInputError& e) {
      c.warnings.push_back(name + ": " + e.what());
    }
  }
  return c;
}

nlohmann::json comparison_json(std::span<const ModelResult> results, const Comparison& c) {
  nlohmann::json j;
  j["pareto_front"] = nlohmann::json::array();
  for (std::size_t i : c.front) {
    const auto& r = results[i];
    j["pareto_front"].push_back({{"index", i},
                                 {"name", r.name},
                                 {"f1", r.f1},
                                 {"inference_time_s", r.inference_time_s},
                                 {"modality", r.modality}});
  }
  j["paired_t_tests"] = nlohmann::json::array();
  for (const auto& t : c.tests) {
    j["paired_t_tests"].push_back({{"metric", t.metric},
                                   {"t", t.result.t},
                                   {"p", t.result.p},
                                   {"df", t.result.df},
                                   {"mean_difference", t.result.mean_difference},
                                   {"significant", t.result.p < 0.05}});
  }
  j["warnings"] = c.warnings;
  return j;
}

}  // namespace keystage::evalstats
