#include "brgy/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "brgy/csv.hpp"

namespace brgy::analytics {

namespace {

constexpr double kGainEpsilon = 1e-12;

const std::vector<std::string> kTriValues{"yes", "no"};
const std::vector<std::string> kAgeBands{"<18", "18-25", "26-40", "41-60", ">60"};
const std::vector<std::string> kGenders{"male", "female"};
const std::vector<std::string> kResidency{"migrant", "non_migrant"};

int argmax_first(std::span<const std::uint64_t> counts) {
  int best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

std::vector<std::uint64_t> class_histogram(std::size_t n_classes, std::span<const Record> records) {
  std::vector<std::uint64_t> h(n_classes, 0);
  for (const auto& r : records) ++h[static_cast<std::size_t>(r.label)];
  return h;
}

[[noreturn]] void schema_mismatch(const std::string& why) { throw Error(ErrorCode::SchemaMismatch, why); }

void check_features(const Schema& schema, std::span<const int> values) {
  if (values.size() != schema.features.size())
    schema_mismatch(fmt::format("expected {} features, got {}", schema.features.size(), values.size()));
  for (std::size_t f = 0; f < values.size(); ++f) {
    int v = values[f];
    if (v != kMissing && (v < 0 || static_cast<std::size_t>(v) >= schema.features[f].values.size()))
      schema_mismatch(fmt::format("value {} out of range for {}", v, schema.features[f].name));
  }
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Unbiased draw in [0, bound).
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    auto x = rng();
    if (x < limit) return x % bound;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Schema / Dataset

std::optional<std::size_t> Schema::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return i;
  return std::nullopt;
}

std::optional<int> Schema::value_index(std::size_t feature, std::string_view value) const {
  const auto& vs = features.at(feature).values;
  for (std::size_t i = 0; i < vs.size(); ++i)
    if (vs[i] == value) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> Schema::class_index(std::string_view label) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == label) return static_cast<int>(i);
  return std::nullopt;
}

bool operator==(const Schema& a, const Schema& b) {
  if (a.classes != b.classes || a.features.size() != b.features.size()) return false;
  for (std::size_t i = 0; i < a.features.size(); ++i)
    if (a.features[i].name != b.features[i].name || a.features[i].values != b.features[i].values) return false;
  return true;
}

void Dataset::add(std::span<const std::string> values, std::string_view label) {
  if (values.size() != schema.features.size())
    schema_mismatch(fmt::format("expected {} features, got {}", schema.features.size(), values.size()));
  Record r;
  for (std::size_t f = 0; f < values.size(); ++f) {
    if (values[f].empty() || values[f] == "unknown") {
      r.values.push_back(kMissing);
      continue;
    }
    auto v = schema.value_index(f, values[f]);
    if (!v) schema_mismatch(fmt::format("unknown value '{}' for {}", values[f], schema.features[f].name));
    r.values.push_back(*v);
  }
  auto c = schema.class_index(label);
  if (!c) throw Error(ErrorCode::UnknownLabel, fmt::format("label '{}' is not a declared class", label));
  r.label = *c;
  records.push_back(std::move(r));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out{schema, {}};
  out.records.reserve(indices.size());
  for (auto i : indices) out.records.push_back(records.at(i));
  return out;
}

void check_records(const Schema& schema, std::span<const Record> records) {
  for (const auto& r : records) {
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= schema.classes.size())
      throw Error(ErrorCode::UnknownLabel, fmt::format("label index {} outside the class set", r.label));
    check_features(schema, r.values);
  }
}

// ---------------------------------------------------------------------------
// Naive Bayes

NaiveBayesModel train_naive_bayes(const Dataset& data, double alpha) {
  if (data.records.empty()) throw Error(ErrorCode::EmptyDataset, "no training records");
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidField, "alpha must be positive", {{"field", "alpha"}});
  check_records(data.schema, data.records);

  const auto& s = data.schema;
  NaiveBayesModel m;
  m.schema = s;
  m.alpha = alpha;
  m.class_counts.assign(s.classes.size(), 0);
  m.value_counts.resize(s.classes.size());
  m.missing_counts.assign(s.classes.size(), std::vector<std::uint64_t>(s.features.size(), 0));
  for (auto& per_class : m.value_counts) {
    per_class.resize(s.features.size());
    for (std::size_t f = 0; f < s.features.size(); ++f) per_class[f].assign(s.features[f].values.size(), 0);
  }
  for (const auto& r : data.records) {
    auto c = static_cast<std::size_t>(r.label);
    ++m.class_counts[c];
    for (std::size_t f = 0; f < r.values.size(); ++f) {
      if (r.values[f] == kMissing)
        ++m.missing_counts[c][f];
      else
        ++m.value_counts[c][f][static_cast<std::size_t>(r.values[f])];
    }
  }
  return m;
}

double nb_prior(const NaiveBayesModel& m, int cls) {
  double total = std::accumulate(m.class_counts.begin(), m.class_counts.end(), 0.0);
  return (static_cast<double>(m.class_counts.at(static_cast<std::size_t>(cls))) + m.alpha) /
         (total + m.alpha * static_cast<double>(m.class_counts.size()));
}

std::vector<double> nb_posterior(const NaiveBayesModel& m, std::span<const int> features) {
  check_features(m.schema, features);
  const auto n_classes = m.class_counts.size();
  std::vector<double> logp(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double lp = std::log(nb_prior(m, static_cast<int>(c)));
    for (std::size_t f = 0; f < features.size(); ++f) {
      if (features[f] == kMissing) continue;
      double known = static_cast<double>(m.class_counts[c] - m.missing_counts[c][f]);
      double count = static_cast<double>(m.value_counts[c][f][static_cast<std::size_t>(features[f])]);
      double width = static_cast<double>(m.schema.features[f].values.size());
      lp += std::log((count + m.alpha) / (known + m.alpha * width));
    }
    logp[c] = lp;
  }
  double top = *std::max_element(logp.begin(), logp.end());
  std::vector<double> out(n_classes);
  double sum = 0;
  for (std::size_t c = 0; c < n_classes; ++c) sum += out[c] = std::exp(logp[c] - top);
  for (auto& p : out) p /= sum;
  return out;
}

// ---------------------------------------------------------------------------
// Decision tree

double entropy(std::span<const std::uint64_t> counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0) return 0;
  double h = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::optional<int> majority_value(std::span<const Record> records, std::size_t feature) {
  std::map<int, std::uint64_t> counts;
  for (const auto& r : records)
    if (r.values[feature] != kMissing) ++counts[r.values[feature]];
  if (counts.empty()) return std::nullopt;
  int best = counts.begin()->first;
  for (const auto& [v, n] : counts)
    if (n > counts[best]) best = v;
  return best;
}

namespace {

/// Partition by feature value, missing rows joining the majority branch.
std::map<int, std::vector<Record>> split_rows(std::span<const Record> records, std::size_t feature, int route) {
  std::map<int, std::vector<Record>> parts;
  for (const auto& r : records) parts[r.values[feature] == kMissing ? route : r.values[feature]].push_back(r);
  return parts;
}

}  // namespace

double information_gain(const Schema& schema, std::span<const Record> records, std::size_t feature) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records");
  if (feature >= schema.features.size()) schema_mismatch("feature index out of range");
  const auto n_classes = schema.classes.size();
  double base = entropy(class_histogram(n_classes, records));
  auto route = majority_value(records, feature);
  if (!route) return 0.0;
  double total = static_cast<double>(records.size());
  double remainder = 0;
  for (const auto& [v, rows] : split_rows(records, feature, *route))
    remainder += static_cast<double>(rows.size()) / total * entropy(class_histogram(n_classes, rows));
  return std::max(0.0, base - remainder);
}

namespace {

struct TreeBuilder {
  const Schema& schema;
  int max_depth;
  std::size_t min_leaf;
  std::vector<TreeNode> nodes;

  std::size_t build(std::vector<Record> rows, int depth, std::vector<bool> used) {
    std::size_t idx = nodes.size();
    nodes.push_back({});
    TreeNode node;
    node.support = class_histogram(schema.classes.size(), rows);
    node.majority = argmax_first(node.support);

    auto nonzero = std::count_if(node.support.begin(), node.support.end(), [](auto c) { return c > 0; });
    if (nonzero <= 1 || depth >= max_depth) {
      nodes[idx] = std::move(node);
      return idx;
    }

    // Later features must beat the incumbent by more than rounding noise.
    std::optional<std::size_t> best;
    double best_gain = -1;
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
      if (used[f]) continue;
      double g = information_gain(schema, rows, f);
      if (g > best_gain + kGainEpsilon) {
        best = f;
        best_gain = g;
      }
    }
    if (!best || best_gain <= kGainEpsilon) {
      nodes[idx] = std::move(node);
      return idx;
    }

    int route = *majority_value(rows, *best);
    auto parts = split_rows(rows, *best, route);
    for (const auto& [v, part] : parts)
      if (part.size() < min_leaf) {
        nodes[idx] = std::move(node);
        return idx;
      }

    used[*best] = true;
    node.feature = best;
    node.missing_route = route;
    nodes[idx] = node;
    std::vector<std::pair<int, std::size_t>> children;
    for (auto& [v, part] : parts) children.emplace_back(v, build(std::move(part), depth + 1, used));
    nodes[idx].children = std::move(children);
    return idx;
  }
};

}  // namespace

DecisionTreeModel train_decision_tree(const Dataset& data, int max_depth, std::size_t min_samples_leaf) {
  if (data.records.empty()) throw Error(ErrorCode::EmptyDataset, "no training records");
  if (max_depth < 1) throw Error(ErrorCode::InvalidField, "max_depth must be at least 1", {{"field", "max_depth"}});
  check_records(data.schema, data.records);
  TreeBuilder b{data.schema, max_depth, std::max<std::size_t>(min_samples_leaf, 1), {}};
  b.build(data.records, 0, std::vector<bool>(data.schema.features.size(), false));
  return DecisionTreeModel{data.schema, max_depth, std::max<std::size_t>(min_samples_leaf, 1), std::move(b.nodes)};
}

TreePrediction tree_predict(const DecisionTreeModel& m, std::span<const int> features) {
  check_features(m.schema, features);
  std::size_t at = 0;
  for (;;) {
    const auto& node = m.nodes.at(at);
    if (!node.feature) return {node.majority, node.support};
    int v = features[*node.feature];
    if (v == kMissing) v = node.missing_route;
    auto it = std::find_if(node.children.begin(), node.children.end(), [&](const auto& c) { return c.first == v; });
    if (it == node.children.end()) return {node.majority, node.support};
    at = it->second;
  }
}

std::size_t tree_depth(const DecisionTreeModel& m) {
  std::function<std::size_t(std::size_t)> depth = [&](std::size_t i) -> std::size_t {
    std::size_t d = 0;
    for (const auto& [v, c] : m.nodes[i].children) d = std::max(d, 1 + depth(c));
    return d;
  };
  return m.nodes.empty() ? 0 : depth(0);
}

// ---------------------------------------------------------------------------
// Evaluation

std::optional<Learner> parse_learner(std::string_view s) {
  if (s == "nb" || s == "naive_bayes") return Learner::NaiveBayes;
  if (s == "tree" || s == "decision_tree") return Learner::Tree;
  return std::nullopt;
}

LearnerFn make_learner(Learner learner, TrainOptions options) {
  if (learner == Learner::NaiveBayes) {
    return [options](const Dataset& train) -> Classifier {
      auto model = std::make_shared<NaiveBayesModel>(train_naive_bayes(train, options.alpha));
      return [model](std::span<const int> x) {
        auto p = nb_posterior(*model, x);
        return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
      };
    };
  }
  return [options](const Dataset& train) -> Classifier {
    int depth = options.max_depth > 0 ? options.max_depth
                                      : std::max<int>(1, static_cast<int>(train.schema.features.size()));
    auto model = std::make_shared<DecisionTreeModel>(train_decision_tree(train, depth, options.min_samples_leaf));
    return [model](std::span<const int> x) { return tree_predict(*model, x).label; };
  };
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || n < k)
    throw Error(ErrorCode::TooFewRecords, fmt::format("cannot make {} folds from {} records", k, n),
                {{"records", n}, {"k", k}});
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

EvaluationReport cross_validate(const Dataset& data, const LearnerFn& learner, std::size_t k, std::uint64_t seed) {
  auto folds = make_folds(data.records.size(), k, seed);
  const auto n_classes = data.schema.classes.size();
  EvaluationReport rep;
  rep.k = k;
  rep.classes = data.schema.classes;
  rep.confusion.assign(n_classes, std::vector<std::uint64_t>(n_classes, 0));

  for (const auto& fold : folds) {
    std::vector<bool> held(data.records.size(), false);
    for (auto i : fold) held[i] = true;
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < data.records.size(); ++i)
      if (!held[i]) train_idx.push_back(i);
    auto classify = learner(data.subset(train_idx));
    std::size_t correct = 0;
    for (auto i : fold) {
      const auto& r = data.records[i];
      int predicted = classify(r.values);
      ++rep.confusion[static_cast<std::size_t>(r.label)][static_cast<std::size_t>(predicted)];
      if (predicted == r.label) ++correct;
    }
    rep.fold_sizes.push_back(fold.size());
    rep.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(fold.size()));
  }
  // Weighted by fold size, i.e. the share of records classified correctly.
  // An unweighted mean over folds lets a handful of one-record folds swing
  // the score by far more than the data warrants.
  std::uint64_t correct_total = 0;
  for (std::size_t c = 0; c < n_classes; ++c) correct_total += rep.confusion[c][c];
  rep.mean_accuracy = static_cast<double>(correct_total) / static_cast<double>(data.records.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::uint64_t predicted = 0, actual = 0;
    for (std::size_t o = 0; o < n_classes; ++o) {
      predicted += rep.confusion[o][c];
      actual += rep.confusion[c][o];
    }
    auto tp = static_cast<double>(rep.confusion[c][c]);
    rep.precision.push_back(predicted ? tp / static_cast<double>(predicted) : 0.0);
    rep.recall.push_back(actual ? tp / static_cast<double>(actual) : 0.0);
  }
  return rep;
}

EvaluationReport cross_validate(const Dataset& data, Learner learner, std::size_t k, std::uint64_t seed,
                                TrainOptions options) {
  return cross_validate(data, make_learner(learner, options), k, seed);
}

// ---------------------------------------------------------------------------
// Offender data

Schema offender_schema(std::vector<std::string> classes, bool with_month) {
  Schema s;
  for (auto name : OffenderFactorVector::kFactorNames) s.features.push_back({std::string(name), kTriValues});
  s.features.push_back({"age_band", kAgeBands});
  s.features.push_back({"gender", kGenders});
  s.features.push_back({"residency_status", kResidency});
  if (with_month) {
    Feature month{"month", {}};
    for (int m = 1; m <= 12; ++m) month.values.push_back(fmt::format("{:02d}", m));
    s.features.push_back(std::move(month));
  }
  s.classes = std::move(classes);
  return s;
}

std::vector<int> encode_factors(const Schema& schema, const OffenderFactorVector& f, std::optional<unsigned> month) {
  std::map<std::string, std::string> named;
  for (std::size_t i = 0; i < f.factors.size(); ++i)
    named[std::string(OffenderFactorVector::kFactorNames[i])] = std::string(to_string(f.factors[i]));
  named["age_band"] = std::string(age_band(f.age));
  named["gender"] = std::string(to_string(f.gender));
  named["residency_status"] = std::string(to_string(f.residency_status));
  if (month) named["month"] = fmt::format("{:02d}", *month);
  std::map<std::string, std::string> present;
  for (auto& [k, v] : named)
    if (schema.feature_index(k)) present[k] = v;
  return encode_named(schema, present);
}

std::vector<int> encode_named(const Schema& schema, const std::map<std::string, std::string>& values) {
  std::vector<int> out(schema.features.size(), kMissing);
  for (const auto& [name, raw] : values) {
    std::string key = name;
    std::string value = raw;
    if (key == "age" && schema.feature_index("age_band")) {
      key = "age_band";
      if (!value.empty()) {
        try {
          value = std::string(age_band(std::stoi(value)));
        } catch (const std::logic_error&) {
          schema_mismatch("age must be an integer");
        }
      }
    }
    auto f = schema.feature_index(key);
    if (!f) schema_mismatch("unknown feature " + name);
    if (value.empty() || value == "unknown") continue;
    auto v = schema.value_index(*f, to_lower(value));
    if (!v) schema_mismatch(fmt::format("unknown value '{}' for {}", value, key));
    out[*f] = *v;
  }
  return out;
}

Dataset load_offender_csv(std::string_view text, const std::string& target, std::vector<std::string> classes) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "empty dataset file");
  const auto& header = rows.front();
  auto col = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto label_col = col(target);
  if (!label_col) schema_mismatch("missing label column " + target);
  bool with_month = col("month").has_value();

  std::vector<std::string> required;
  for (auto n : OffenderFactorVector::kFactorNames) required.emplace_back(n);
  for (const char* n : {"age", "gender", "residency_status"}) required.emplace_back(n);
  for (const auto& n : required)
    if (!col(n)) schema_mismatch("missing column " + n);

  if (classes.empty()) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != header.size()) continue;
      auto label = trim(rows[i][*label_col]);
      if (std::find(classes.begin(), classes.end(), label) == classes.end()) classes.push_back(label);
    }
  }

  Dataset d{offender_schema(classes, with_month), {}};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) schema_mismatch(fmt::format("row {}: wrong column count", i + 1));
    std::map<std::string, std::string> named;
    for (const auto& n : required) named[n] = to_lower(trim(row[*col(n)]));
    if (with_month) {
      auto m = trim(row[*col("month")]);
      if (m.size() == 1) m = "0" + m;
      named["month"] = m;
    }
    Record r;
    r.values = encode_named(d.schema, named);
    auto c = d.schema.class_index(trim(row[*label_col]));
    if (!c) throw Error(ErrorCode::UnknownLabel, fmt::format("row {}: label not in class set", i + 1));
    r.label = *c;
    d.records.push_back(std::move(r));
  }
  return d;
}

std::optional<Task> parse_task(std::string_view s) {
  if (s == "reoffend") return Task::Reoffend;
  if (s == "offend_by_residency") return Task::OffendByResidency;
  return std::nullopt;
}

std::string_view to_string(Task t) { return t == Task::Reoffend ? "reoffend" : "offend_by_residency"; }

Dataset derive_task_dataset(const Tables& t, Task task, Date today) {
  std::map<std::string, std::size_t> cases_per_respondent;
  for (const auto& n : t.case_order)
    for (const auto& id : t.cases.at(n).respondent_ids) ++cases_per_respondent[id];

  if (task == Task::Reoffend) {
    Dataset d{offender_schema({"yes", "no"}, true), {}};
    for (const auto& n : t.case_order) {
      const auto& c = t.cases.at(n);
      for (const auto& id : c.respondent_ids) {
        Record r;
        r.values = encode_factors(d.schema, c.offender_factors.at(id), static_cast<unsigned>(c.date_filed.month()));
        r.label = cases_per_respondent[id] >= 2 ? 0 : 1;
        d.records.push_back(std::move(r));
      }
    }
    return d;
  }

  Dataset d;
  d.schema.features = {{"residency_status", kResidency}, {"gender", kGenders}, {"age_band", kAgeBands}};
  d.schema.classes = {"yes", "no"};
  for (const auto& [id, res] : t.residents) {
    Record r;
    r.values = {res.residency_status == Residency::Migrant ? 0 : 1, res.gender == Gender::Male ? 0 : 1,
                *d.schema.value_index(2, age_band(std::max(0, age_on(res.birthdate, today))))};
    r.label = cases_per_respondent.count(id) ? 0 : 1;
    d.records.push_back(std::move(r));
  }
  return d;
}

LikelihoodReport likelihood_report(const Dataset& data, Task task) {
  std::set<int> present;
  for (const auto& r : data.records) present.insert(r.label);
  if (present.size() < 2)
    throw Error(ErrorCode::InsufficientClasses, "need records of at least two classes",
                {{"classes_present", present.size()}});
  auto yes = data.schema.class_index("yes");
  if (!yes) schema_mismatch("task datasets declare a 'yes' class");

  LikelihoodReport rep;
  rep.task = task;
  rep.records = data.records.size();
  rep.model = train_naive_bayes(data, 1.0);

  auto group = [&](std::size_t f, int v) {
    GroupPosterior g;
    g.feature = data.schema.features[f].name;
    g.value = data.schema.features[f].values[static_cast<std::size_t>(v)];
    for (const auto& r : data.records)
      if (r.values[f] == v) {
        ++g.records;
        if (r.label == *yes) ++g.positives;
      }
    std::vector<int> x(data.schema.features.size(), kMissing);
    x[f] = v;
    g.posterior = nb_posterior(rep.model, x)[static_cast<std::size_t>(*yes)];
    rep.groups.push_back(std::move(g));
  };

  auto residency = *data.schema.feature_index("residency_status");
  group(residency, 0);
  group(residency, 1);
  if (task == Task::Reoffend)
    for (auto name : OffenderFactorVector::kFactorNames) group(*data.schema.feature_index(name), 0);
  return rep;
}

std::optional<ChartGrouping> parse_chart_grouping(std::string_view s) {
  if (s == "offense_type") return ChartGrouping::OffenseType;
  if (s == "zone") return ChartGrouping::Zone;
  if (s == "month") return ChartGrouping::Month;
  if (s == "residency_status") return ChartGrouping::ResidencyStatus;
  return std::nullopt;
}

std::map<std::string, std::size_t> crime_chart(const Tables& t, const DateWindow& window, ChartGrouping group_by) {
  std::map<std::string, std::size_t> out;
  for (const auto& n : t.case_order) {
    const auto& c = t.cases.at(n);
    if (!window.contains(c.date_filed)) continue;
    switch (group_by) {
      case ChartGrouping::OffenseType: ++out[c.offense_type]; break;
      case ChartGrouping::Zone: ++out[std::to_string(c.zone_id)]; break;
      case ChartGrouping::Month: ++out[format_month(c.date_filed)]; break;
      case ChartGrouping::ResidencyStatus:
        for (const auto& id : c.respondent_ids)
          ++out[std::string(to_string(c.offender_factors.at(id).residency_status))];
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const Schema& s) {
  json features = json::array();
  for (const auto& f : s.features) features.push_back({{"name", f.name}, {"values", f.values}});
  return json{{"features", features}, {"classes", s.classes}};
}

Schema schema_from_json(const json& j) {
  Schema s;
  for (const auto& f : j.at("features"))
    s.features.push_back({f.at("name").get<std::string>(), f.at("values").get<std::vector<std::string>>()});
  s.classes = j.at("classes").get<std::vector<std::string>>();
  return s;
}

json to_json(const NaiveBayesModel& m) {
  return json{{"type", "naive_bayes"},
              {"schema", to_json(m.schema)},
              {"alpha", m.alpha},
              {"class_counts", m.class_counts},
              {"feature_value_counts", m.value_counts},
              {"missing_counts", m.missing_counts}};
}

NaiveBayesModel naive_bayes_from_json(const json& j) {
  if (j.value("type", "") != "naive_bayes") schema_mismatch("not a naive_bayes model");
  NaiveBayesModel m;
  m.schema = schema_from_json(j.at("schema"));
  m.alpha = j.at("alpha").get<double>();
  m.class_counts = j.at("class_counts").get<std::vector<std::uint64_t>>();
  m.value_counts = j.at("feature_value_counts").get<std::vector<std::vector<std::vector<std::uint64_t>>>>();
  m.missing_counts = j.at("missing_counts").get<std::vector<std::vector<std::uint64_t>>>();
  return m;
}

json to_json(const DecisionTreeModel& m) {
  json nodes = json::array();
  for (const auto& n : m.nodes) {
    json node{{"support", n.support}, {"majority", m.schema.classes[static_cast<std::size_t>(n.majority)]}};
    if (n.feature) {
      const auto& f = m.schema.features[*n.feature];
      node["feature"] = f.name;
      node["missing_route"] = f.values[static_cast<std::size_t>(n.missing_route)];
      json children = json::object();
      for (const auto& [v, c] : n.children) children[f.values[static_cast<std::size_t>(v)]] = c;
      node["children"] = children;
    }
    nodes.push_back(std::move(node));
  }
  return json{{"type", "decision_tree"},
              {"schema", to_json(m.schema)},
              {"max_depth", m.max_depth},
              {"min_samples_leaf", m.min_samples_leaf},
              {"nodes", nodes}};
}

DecisionTreeModel decision_tree_from_json(const json& j) {
  if (j.value("type", "") != "decision_tree") schema_mismatch("not a decision_tree model");
  DecisionTreeModel m;
  m.schema = schema_from_json(j.at("schema"));
  m.max_depth = j.at("max_depth").get<int>();
  m.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.support = n.at("support").get<std::vector<std::uint64_t>>();
    node.majority = *m.schema.class_index(n.at("majority").get<std::string>());
    if (n.contains("feature")) {
      auto f = m.schema.feature_index(n.at("feature").get<std::string>());
      if (!f) schema_mismatch("tree references an unknown feature");
      node.feature = *f;
      node.missing_route = *m.schema.value_index(*f, n.at("missing_route").get<std::string>());
      for (const auto& [value, child] : n.at("children").items())
        node.children.emplace_back(*m.schema.value_index(*f, value), child.get<std::size_t>());
      std::sort(node.children.begin(), node.children.end());
    }
    m.nodes.push_back(std::move(node));
  }
  return m;
}

json to_json(const EvaluationReport& r) {
  return json{{"k", r.k},
              {"classes", r.classes},
              {"fold_sizes", r.fold_sizes},
              {"fold_accuracy", r.fold_accuracy},
              {"mean_accuracy", r.mean_accuracy},
              {"confusion", r.confusion},
              {"precision", r.precision},
              {"recall", r.recall}};
}

json to_json(const LikelihoodReport& r) {
  json groups = json::array();
  for (const auto& g : r.groups)
    groups.push_back({{"feature", g.feature},
                      {"value", g.value},
                      {"records", g.records},
                      {"positives", g.positives},
                      {"posterior_yes", g.posterior}});
  return json{{"task", to_string(r.task)},
              {"records", r.records},
              {"classes", r.model.schema.classes},
              {"class_counts", r.model.class_counts},
              {"groups", groups}};
}

}  // namespace brgy::analytics
