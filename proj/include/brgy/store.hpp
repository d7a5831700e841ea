#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <type_traits>
#include <vector>

#include "brgy/model.hpp"

namespace brgy {

/// Append-only write-ahead journal. One line per commit, fsynced before
/// append() returns. A torn trailing line (crash mid-write) is discarded on
/// open.
class Journal {
 public:
  explicit Journal(std::filesystem::path file);
  ~Journal();
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  /// Commits recovered at open time, oldest first.
  const std::vector<json>& recovered() const { return recovered_; }
  void append(const json& commit);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<json> recovered_;
};

/// In-memory materialization of every committed event.
struct Tables {
  std::map<std::string, Resident> residents;
  std::map<std::string, std::vector<TransactionEntry>> history;
  std::map<std::string, BlotterCase> cases;
  std::vector<std::string> case_order;
  std::map<std::string, Certificate> certificates;
  std::map<std::string, std::vector<std::string>> certificates_by_resident;
  std::map<std::string, ChildRecord> children;
  std::map<std::string, HealthCase> health_cases;
  std::map<std::string, BroadcastJob> broadcasts;
  std::map<std::string, Advisory> advisories;
  std::map<std::string, UserAccount> accounts;
  std::uint64_t commits = 0;

  /// True when `id` names a stored record of the type that `kind` refers to.
  bool reference_exists(TransactionKind kind, const std::string& id) const;
};

/// Events accumulated by one write; committed atomically.
class Batch {
 public:
  void emit(std::string type, json payload);
  const std::vector<json>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

 private:
  std::vector<json> events_;
};

void apply_event(Tables& t, const json& event);

enum class CommitStage { BeforeJournal, AfterJournal };

/// Thrown by fault hooks to emulate a process dying at a commit point.
struct SimulatedCrash : std::runtime_error {
  SimulatedCrash() : std::runtime_error("simulated crash") {}
};

/// Single-node durable store. Reads share a lock; writes are serialized and
/// journaled before they become visible.
class Database {
 public:
  struct Options {
    std::optional<std::filesystem::path> data_dir;  // absent: memory only
    Clock clock = system_clock();
  };

  explicit Database(Options options);
  Database() : Database(Options{}) {}

  template <class F>
  auto read(F&& f) const {
    std::shared_lock lock(mutex_);
    return f(static_cast<const Tables&>(tables_));
  }

  /// `f(const Tables&, Batch&)` validates and emits events. Nothing is
  /// applied if it throws.
  template <class F>
  auto write(F&& f) {
    std::unique_lock lock(mutex_);
    Batch batch;
    if constexpr (std::is_void_v<decltype(f(static_cast<const Tables&>(tables_), batch))>) {
      f(static_cast<const Tables&>(tables_), batch);
      commit(batch);
    } else {
      auto result = f(static_cast<const Tables&>(tables_), batch);
      commit(batch);
      return result;
    }
  }

  Timestamp now() const { return clock_(); }
  const Clock& clock() const { return clock_; }
  bool durable() const { return journal_ != nullptr; }
  const Journal* journal() const { return journal_.get(); }

  void set_fault_hook(std::function<void(CommitStage)> hook) { fault_hook_ = std::move(hook); }

 private:
  void commit(const Batch& batch);

  mutable std::shared_mutex mutex_;
  Tables tables_;
  Clock clock_;
  std::unique_ptr<Journal> journal_;
  std::function<void(CommitStage)> fault_hook_;
};

/// "000042"
std::string sequence_id(std::string_view prefix, std::size_t n);

}  // namespace brgy
