#include "adatag/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "adatag/error.hpp"

namespace adatag::eval {

using nlohmann::json;

Counts& Counts::operator+=(const Counts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

PRF1 prf1(const Counts& c) {
  PRF1 m;
  m.precision = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  m.recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double s = m.precision + m.recall;
  m.f1 = s == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / s;
  return m;
}

Counts count(const ValueSet& gold, const ValueSet& predicted) {
  Counts c;
  for (const auto& p : predicted) {
    if (gold.count(p)) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = gold.size() - c.tp;
  return c;
}

PRF1 prf1(const ValueSet& gold, const ValueSet& predicted) { return prf1(count(gold, predicted)); }

PRF1 macro(std::span<const PRF1> per_attribute) {
  PRF1 m;
  if (per_attribute.empty()) return m;
  for (const auto& a : per_attribute) {
    m.precision += a.precision;
    m.recall += a.recall;
    m.f1 += a.f1;
  }
  const double n = static_cast<double>(per_attribute.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

ValueSet values_of(const std::vector<corpus::Token>& tokens, const tagging::TagSeq& tags) {
  ValueSet out;
  for (const auto& span : tagging::tags_to_spans(tags)) out.insert(corpus::join_tokens(tokens, span));
  return out;
}

ValueSet extract(const Model& model, const std::vector<corpus::Token>& tokens,
                 const std::string& attribute) {
  const std::size_t a = model.attribute_index(attribute);
  return values_of(tokens, model.predict_tags(a, tokens));
}

std::vector<ExtractionResult> predict(const Model& model,
                                      const std::vector<corpus::LabeledExample>& examples) {
  std::vector<const corpus::LabeledExample*> known;
  for (const auto& ex : examples) {
    if (model.attributes().contains(ex.attribute)) known.push_back(&ex);
  }
  std::vector<decoder::DecoderInstance> heads;
  for (std::size_t h = 0; h < model.num_heads(); ++h) heads.push_back(model.head_instance(h));

  std::vector<ExtractionResult> out(known.size());
  const auto n = static_cast<std::ptrdiff_t>(known.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& ex = *known[i];
    const std::size_t a = model.attribute_index(ex.attribute);
    auto& r = out[i];
    r.id = ex.id;
    r.attribute = ex.attribute;
    r.gold = values_of(ex.tokens, ex.tags);
    r.predicted = values_of(ex.tokens, model.predict_tags(a, ex.tokens, heads[model.head_of(a)]));
  }
  return out;
}

MetricsReport score(const std::vector<ExtractionResult>& results) {
  std::map<std::string, AttributeMetrics> by_attr;
  for (const auto& r : results) {
    auto& m = by_attr[r.attribute];
    m.attribute = r.attribute;
    m.counts += count(r.gold, r.predicted);
    ++m.examples;
  }
  MetricsReport report;
  std::vector<PRF1> supported;
  for (auto& [id, m] : by_attr) {
    m.metrics = prf1(m.counts);
    if (m.support() == 0) {
      report.warnings.push_back("attribute " + id + " has no gold values; excluded from macro");
    } else {
      supported.push_back(m.metrics);
    }
    report.attributes.push_back(m);
  }
  if (!supported.empty()) report.macro = macro(supported);
  return report;
}

void stratify(MetricsReport& report, const std::map<std::string, std::size_t>& train_counts,
              std::size_t threshold) {
  Stratum high, low;
  std::vector<PRF1> high_m, low_m;
  for (const auto& a : report.attributes) {
    if (a.support() == 0) continue;
    auto it = train_counts.find(a.attribute);
    const std::size_t n = it == train_counts.end() ? 0 : it->second;
    auto& stratum = n >= threshold ? high : low;
    auto& metrics = n >= threshold ? high_m : low_m;
    stratum.attributes.push_back(a.attribute);
    metrics.push_back(a.metrics);
  }
  if (!high_m.empty()) high.macro = macro(high_m);
  if (!low_m.empty()) low.macro = macro(low_m);
  report.threshold = threshold;
  report.high = std::move(high);
  report.low = std::move(low);
}

std::map<std::string, std::size_t> example_counts(
    const std::vector<corpus::LabeledExample>& examples) {
  std::map<std::string, std::size_t> out;
  for (const auto& ex : examples) ++out[ex.attribute];
  return out;
}

namespace {

json prf1_json(const PRF1& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json stratum_json(const std::optional<Stratum>& s) {
  if (!s) return nullptr;
  json j;
  j["attributes"] = s->attributes;
  j["macro"] = s->macro ? prf1_json(*s->macro) : json("n/a");
  return j;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string report_json(const MetricsReport& report) {
  json j;
  j["attributes"] = json::array();
  for (const auto& a : report.attributes) {
    json e = prf1_json(a.metrics);
    e["attribute"] = a.attribute;
    e["tp"] = a.counts.tp;
    e["fp"] = a.counts.fp;
    e["fn"] = a.counts.fn;
    e["support"] = a.support();
    e["examples"] = a.examples;
    j["attributes"].push_back(e);
  }
  j["macro"] = report.macro ? prf1_json(*report.macro) : json(nullptr);
  j["warnings"] = report.warnings;
  if (report.threshold) {
    j["threshold"] = *report.threshold;
    j["high_resource"] = stratum_json(report.high);
    j["low_resource"] = stratum_json(report.low);
  }
  return j.dump(2);
}

std::string report_table(const MetricsReport& report) {
  std::size_t width = 9;
  for (const auto& a : report.attributes) width = std::max(width, a.attribute.size());
  std::ostringstream out;
  auto line = [&](const std::string& name, const std::string& p, const std::string& r,
                  const std::string& f, const std::string& support) {
    out << name << std::string(width - std::min(width, name.size()) + 2, ' ');
    for (const auto* col : {&p, &r, &f}) out << std::string(8 - std::min<std::size_t>(8, col->size()), ' ') << *col;
    out << std::string(10 - std::min<std::size_t>(10, support.size()), ' ') << support << '\n';
  };
  line("attribute", "P", "R", "F1", "support");
  for (const auto& a : report.attributes) {
    line(a.attribute, fmt(a.metrics.precision), fmt(a.metrics.recall), fmt(a.metrics.f1),
         std::to_string(a.support()));
  }
  if (report.macro) {
    line("macro", fmt(report.macro->precision), fmt(report.macro->recall), fmt(report.macro->f1), "");
  } else {
    line("macro", "n/a", "n/a", "n/a", "");
  }
  auto stratum = [&](const char* name, const std::optional<Stratum>& s) {
    if (!s) return;
    if (s->macro) {
      line(name, fmt(s->macro->precision), fmt(s->macro->recall), fmt(s->macro->f1),
           std::to_string(s->attributes.size()) + " attr");
    } else {
      line(name, "n/a", "n/a", "n/a", "0 attr");
    }
  };
  stratum("high", report.high);
  stratum("low", report.low);
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

void write_predictions(const std::vector<ExtractionResult>& results, std::ostream& out) {
  for (const auto& r : results) {
    json j;
    j["id"] = r.id;
    j["attribute"] = r.attribute;
    j["predicted"] = r.predicted;
    j["gold"] = r.gold;
    out << j.dump() << '\n';
  }
}

}  // namespace adatag::eval
