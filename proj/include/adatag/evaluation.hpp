#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "adatag/corpus.hpp"
#include "adatag/model.hpp"

namespace adatag::eval {

using ValueSet = std::set<std::string>;

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  Counts& operator+=(const Counts& o);
};

struct PRF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = 1 with no predictions, R = 1 with no gold, F1 = 0 when P + R = 0.
PRF1 prf1(const Counts& c);
Counts count(const ValueSet& gold, const ValueSet& predicted);
PRF1 prf1(const ValueSet& gold, const ValueSet& predicted);

// Unweighted means; macro F1 is the mean of F1s.
PRF1 macro(std::span<const PRF1> per_attribute);

struct ExtractionResult {
  std::string id;
  std::string attribute;
  ValueSet predicted;
  ValueSet gold;
};

// Normalized value strings of the spans in `tags`.
ValueSet values_of(const std::vector<corpus::Token>& tokens, const tagging::TagSeq& tags);

// Viterbi decode and span strings for one attribute.
ValueSet extract(const Model& model, const std::vector<corpus::Token>& tokens,
                 const std::string& attribute);

// One result per example whose attribute the model knows; parallel over
// examples, output in input order.
std::vector<ExtractionResult> predict(const Model& model,
                                      const std::vector<corpus::LabeledExample>& examples);

struct AttributeMetrics {
  std::string attribute;
  Counts counts;
  PRF1 metrics;
  std::size_t examples = 0;
  std::size_t support() const { return counts.tp + counts.fn; }
};

struct Stratum {
  std::vector<std::string> attributes;
  std::optional<PRF1> macro;  // nullopt when empty
};

struct MetricsReport {
  std::vector<AttributeMetrics> attributes;  // sorted by id
  std::optional<PRF1> macro;  // over attributes with support > 0
  std::vector<std::string> warnings;
  std::optional<std::size_t> threshold;
  std::optional<Stratum> high;
  std::optional<Stratum> low;

  double macro_f1() const { return macro ? macro->f1 : 0.0; }
};

MetricsReport score(const std::vector<ExtractionResult>& results);

// Attributes with train_counts >= threshold are high-resource.
void stratify(MetricsReport& report, const std::map<std::string, std::size_t>& train_counts,
              std::size_t threshold = 1000);

std::map<std::string, std::size_t> example_counts(
    const std::vector<corpus::LabeledExample>& examples);

std::string report_json(const MetricsReport& report);
std::string report_table(const MetricsReport& report);
void write_predictions(const std::vector<ExtractionResult>& results, std::ostream& out);

}  // namespace adatag::eval
