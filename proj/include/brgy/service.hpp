#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "brgy/analytics.hpp"
#include "brgy/casework.hpp"
#include "brgy/geo.hpp"
#include "brgy/health.hpp"
#include "brgy/notify.hpp"
#include "brgy/opendata.hpp"
#include "brgy/registry.hpp"
#include "brgy/store.hpp"

namespace httplib {
class Server;
}

namespace brgy {

struct Config {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> data_dir;
  std::filesystem::path zones_file;
  std::optional<std::string> sms_gateway_url;
  std::optional<std::string> sms_gateway_key;
  std::string barangay_name = "Barangay";
  std::chrono::seconds session_ttl{8 * 3600};

  /// BIND_ADDR (host:port), DATA_DIR, ZONES_FILE, SMS_GATEWAY_URL,
  /// SMS_GATEWAY_KEY. Throws CONFIG_INVALID.
  static Config from_env();
};

/// "host:port" or ":port". Throws CONFIG_INVALID.
std::pair<std::string, int> parse_bind_addr(std::string_view text);

// ---------------------------------------------------------------------------
// Access control

enum class Action {
  RegistryRead,
  RegistryWrite,
  BlotterWrite,
  ClearanceIssue,
  ClearanceOverride,
  HealthWrite,
  StatsRead,
  AnalyticsTrain,
  SmsSend,
  AdvisoryPublish,
  OpenData,
};

std::string_view to_string(Action a);
bool authorize(Role role, Action action);

struct Session {
  std::string token;
  std::string username;
  Role role = Role::ResidentPublic;
  Timestamp expires_at{};
};

/// Salted argon2id verifier string.
std::string hash_password(const std::string& password);
bool verify_password(const std::string& hash, const std::string& password);
/// 128 random bits, hex-encoded.
std::string random_token();

class Accounts {
 public:
  Accounts(Database& db, std::chrono::seconds ttl) : db_(db), ttl_(ttl) {}

  /// Throws CONFLICT for a taken username, INVALID_FIELD for an empty
  /// username or a password shorter than 8 characters.
  void create_account(const std::string& username, const std::string& password, Role role,
                      std::optional<std::string> linked_resident_id = std::nullopt);
  /// Throws BAD_CREDENTIALS for an unknown user and a wrong password alike.
  Session authenticate(const std::string& username, const std::string& password);
  /// Throws UNAUTHENTICATED for unknown or expired tokens.
  Session validate(const std::string& token);
  std::size_t count() const;

 private:
  Database& db_;
  std::chrono::seconds ttl_;
  std::mutex mutex_;
  std::map<std::string, Session> sessions_;
};

// ---------------------------------------------------------------------------
// Facade

class System {
 public:
  /// `gateway` overrides the one built from the config.
  explicit System(const Config& config, std::shared_ptr<notify::Gateway> gateway = nullptr,
                  Clock clock = system_clock());
  System(const Config& config, geo::ZoneMap zones, std::shared_ptr<notify::Gateway> gateway = nullptr,
         Clock clock = system_clock());

  Database db;
  geo::ZoneMap zones;
  Registry registry;
  Casework casework;
  Health health;
  notify::Notify notify;
  Accounts accounts;

  std::string export_dataset(const std::string& dataset_id, const DateWindow& window = {}) const;

  struct TrainResult {
    analytics::EvaluationReport report;
    json model;
  };
  /// Cross-validates then fits on every record of the task's dataset.
  TrainResult train(analytics::Task task, analytics::Learner learner, std::size_t k, std::uint64_t seed,
                    analytics::TrainOptions options = {});
  std::optional<json> last_training(analytics::Task task) const;

 private:
  mutable std::mutex training_mutex_;
  std::map<analytics::Task, json> trained_;
};

// ---------------------------------------------------------------------------
// HTTP

int http_status(ErrorCode code);
json error_envelope(const Error& e);

class HttpService {
 public:
  explicit HttpService(System& system);
  ~HttpService();

  /// Binds and returns the bound port (useful when asked for port 0).
  /// Throws BIND_FAILURE.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();

  httplib::Server& server() { return *server_; }

 private:
  void mount();

  System& sys_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace brgy
