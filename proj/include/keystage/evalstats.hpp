#pragma once

// Model comparison: paired t-tests between unimodal and multimodal result
// sets, and the Pareto front over (higher F1, lower inference time).

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace keystage::evalstats {

struct ModelResult {
  std::string name;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long parameters = 0;
  double inference_time_s = 0.0;
  /// "unimodal", "multimodal" or empty when unknown.
  std::string modality;
};

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
  double t = 0.0;
  double p = 0.0;  // two-sided
  std::size_t df = 0;
  double mean_difference = 0.0;  // mean of a - b
};

/// Two-sided paired t-test on a - b. Throws DimensionError on length mismatch
/// or fewer than two pairs, DegenerateInputError when the differences have
/// zero variance.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// a has F1 >= and time <= b, with at least one strict.
bool dominates(const ModelResult& a, const ModelResult& b);

/// Indices of non-dominated results, in input order. Exact duplicates do not
/// dominate each other, so all copies stay on the front.
std::vector<std::size_t> pareto_front(std::span<const ModelResult> results);

/// Columns name, accuracy, precision, recall, f1, parameters,
/// inference_time_s, and optionally modality; extra columns are ignored.
std::vector<ModelResult> read_results_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<ModelResult> read_results_csv(const std::filesystem::path& path);

struct MetricTest {
  std::string metric;
  TTestResult result;
};

struct Comparison {
  std::vector<std::size_t> front;
  /// multimodal minus unimodal, pairing the i-th unimodal row with the i-th
  /// multimodal row in file order. Empty when modality is missing or the
  /// groups differ in size.
  std::vector<MetricTest> tests;
  std::vector<std::string> warnings;
};

Comparison compare(std::span<const ModelResult> results);

nlohmann::json comparison_json(std::span<const ModelResult> results, const Comparison& c);

}  // namespace keystage::evalstats
