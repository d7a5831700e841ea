#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brgy/model.hpp"
#include "brgy/store.hpp"

namespace brgy::analytics {

/// Encoded value for "unknown"/absent categorical data.
inline constexpr int kMissing = -1;

struct Feature {
  std::string name;
  std::vector<std::string> values;
};

struct Schema {
  std::vector<Feature> features;
  std::vector<std::string> classes;  // declaration order breaks ties

  std::optional<std::size_t> feature_index(std::string_view name) const;
  std::optional<int> value_index(std::size_t feature, std::string_view value) const;
  std::optional<int> class_index(std::string_view label) const;
  friend bool operator==(const Schema& a, const Schema& b);
};

struct Record {
  std::vector<int> values;  // one per schema feature, or kMissing
  int label = 0;
};

struct Dataset {
  Schema schema;
  std::vector<Record> records;

  /// Encodes string values ("unknown" or "" map to missing). Throws
  /// SCHEMA_MISMATCH for unknown values and UNKNOWN_LABEL for labels outside
  /// the class set.
  void add(std::span<const std::string> values, std::string_view label);
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Every feature value is in range (or missing) and every label is a class.
void check_records(const Schema& schema, std::span<const Record> records);

// ---------------------------------------------------------------------------
// Naive Bayes

struct NaiveBayesModel {
  Schema schema;
  double alpha = 1.0;
  std::vector<std::uint64_t> class_counts;                          // [class]
  std::vector<std::vector<std::vector<std::uint64_t>>> value_counts;  // [class][feature][value]
  std::vector<std::vector<std::uint64_t>> missing_counts;             // [class][feature]
};

/// Exact frequency tallies. Throws EMPTY_DATASET, UNKNOWN_LABEL,
/// INVALID_FIELD (alpha <= 0).
NaiveBayesModel train_naive_bayes(const Dataset& data, double alpha = 1.0);

/// Smoothed prior (n_c + a) / (N + a*|C|).
double nb_prior(const NaiveBayesModel& model, int cls);

/// P(class | features), normalized. Missing features contribute no factor;
/// likelihoods are (count + a) / (known_c + a*|values|) where known_c is the
/// class count minus records with that feature missing.
std::vector<double> nb_posterior(const NaiveBayesModel& model, std::span<const int> features);

// ---------------------------------------------------------------------------
// Decision tree

/// Base-2 entropy of a class histogram.
double entropy(std::span<const std::uint64_t> class_counts);

/// H(target) - sum_v |S_v|/|S| H(target | v). Rows with the feature missing
/// are counted in the most populated known branch.
double information_gain(const Schema& schema, std::span<const Record> records, std::size_t feature);

/// Most frequent value among rows where `feature` is known (lowest index on
/// ties); nullopt if none is known.
std::optional<int> majority_value(std::span<const Record> records, std::size_t feature);

struct TreeNode {
  std::optional<std::size_t> feature;  // empty for leaves
  std::vector<std::uint64_t> support;  // class histogram of training rows
  int majority = 0;
  int missing_route = 0;                     // child value used for missing input
  std::vector<std::pair<int, std::size_t>> children;  // (value, node index), ascending value
};

struct DecisionTreeModel {
  Schema schema;
  int max_depth = 1;
  std::size_t min_samples_leaf = 1;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

/// Greedy information-gain partitioning. Ties go to the lowest feature index.
/// A node becomes a leaf when pure, at max_depth, when no feature has
/// positive gain, or when the best split leaves a branch smaller than
/// min_samples_leaf.
DecisionTreeModel train_decision_tree(const Dataset& data, int max_depth, std::size_t min_samples_leaf = 1);

struct TreePrediction {
  int label = 0;
  std::vector<std::uint64_t> support;
};

TreePrediction tree_predict(const DecisionTreeModel& model, std::span<const int> features);
std::size_t tree_depth(const DecisionTreeModel& model);

// ---------------------------------------------------------------------------
// Evaluation

/// Classifier produced by a learner from a training set.
using Classifier = std::function<int(std::span<const int>)>;
using LearnerFn = std::function<Classifier(const Dataset& training)>;

enum class Learner { NaiveBayes, Tree };
std::optional<Learner> parse_learner(std::string_view s);

struct TrainOptions {
  double alpha = 1.0;
  int max_depth = 0;  // 0: number of features
  std::size_t min_samples_leaf = 1;
};

LearnerFn make_learner(Learner learner, TrainOptions options = {});

/// Seeded shuffle then k contiguous folds whose sizes differ by at most one.
/// Throws TOO_FEW_RECORDS when k < 2 or n < k.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct EvaluationReport {
  std::size_t k = 0;
  std::vector<std::string> classes;
  std::vector<std::size_t> fold_sizes;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0;  // correct / total, i.e. folds weighted by size
  std::vector<std::vector<std::uint64_t>> confusion;  // [actual][predicted]
  std::vector<double> precision;
  std::vector<double> recall;
};

EvaluationReport cross_validate(const Dataset& data, const LearnerFn& learner, std::size_t k, std::uint64_t seed);
EvaluationReport cross_validate(const Dataset& data, Learner learner, std::size_t k, std::uint64_t seed,
                                TrainOptions options = {});

// ---------------------------------------------------------------------------
// Offender data

/// Ten yes/no factors, age band, gender, residency status and optionally
/// month of filing ("01".."12").
Schema offender_schema(std::vector<std::string> classes, bool with_month);
std::vector<int> encode_factors(const Schema& schema, const OffenderFactorVector& f,
                                std::optional<unsigned> month = std::nullopt);
/// Parses named feature values ("employment=yes age=30 ...") against a schema;
/// absent features are missing. Throws SCHEMA_MISMATCH.
std::vector<int> encode_named(const Schema& schema, const std::map<std::string, std::string>& values);

/// CSV with the offender factor columns (age numeric, banded on load), an
/// optional `month` column, and a label column. Classes are declared in
/// order of first appearance unless `classes` is given.
Dataset load_offender_csv(std::string_view text, const std::string& target = "label",
                          std::vector<std::string> classes = {});

enum class Task { Reoffend, OffendByResidency };
std::optional<Task> parse_task(std::string_view s);
std::string_view to_string(Task t);

/// reoffend: one record per (case, respondent), label "yes" when that
/// respondent is named in two or more cases. offend_by_residency: one record
/// per resident (residency, gender, age band), label "yes" when the resident
/// is a respondent in any case.
Dataset derive_task_dataset(const Tables& t, Task task, Date today);

struct GroupPosterior {
  std::string feature;
  std::string value;
  std::size_t records = 0;
  std::size_t positives = 0;
  double posterior = 0;  // P(yes | feature = value)
};

struct LikelihoodReport {
  Task task = Task::Reoffend;
  std::size_t records = 0;
  NaiveBayesModel model;
  std::vector<GroupPosterior> groups;
};

/// Throws INSUFFICIENT_CLASSES unless both classes occur.
LikelihoodReport likelihood_report(const Dataset& data, Task task);

enum class ChartGrouping { OffenseType, Zone, Month, ResidencyStatus };
std::optional<ChartGrouping> parse_chart_grouping(std::string_view s);

/// Case counts per group. The residency grouping counts (case, respondent)
/// pairs.
std::map<std::string, std::size_t> crime_chart(const Tables& t, const DateWindow& window, ChartGrouping group_by);

// JSON export/import of models and reports.
json to_json(const Schema& s);
Schema schema_from_json(const json& j);
json to_json(const NaiveBayesModel& m);
NaiveBayesModel naive_bayes_from_json(const json& j);
json to_json(const DecisionTreeModel& m);
DecisionTreeModel decision_tree_from_json(const json& j);
json to_json(const EvaluationReport& r);
json to_json(const LikelihoodReport& r);

}  // namespace brgy::analytics
