#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "brgy/model.hpp"
#include "brgy/store.hpp"

namespace brgy::notify {

inline constexpr std::size_t kSingleSegment = 160;
inline constexpr std::size_t kMultiSegment = 153;
inline constexpr int kRetryLimit = 3;

/// Septet length of a GSM-7 message (extension characters count twice).
/// Throws UNSUPPORTED_CHARSET.
std::size_t gsm7_length(std::string_view utf8);

/// Splits into one segment (<= 160 septets) or 153-septet parts. An
/// extension character never straddles a boundary. Throws EMPTY_MESSAGE,
/// UNSUPPORTED_CHARSET.
std::vector<std::string> segment_message(std::string_view utf8);

struct AudienceMember {
  std::string resident_id;
  std::string phone;
  friend bool operator==(const AudienceMember&, const AudienceMember&) = default;
};

/// Residents with a mobile number matching the filter, in id order; a shared
/// number stays with the lowest resident id.
std::vector<AudienceMember> resolve_audience(const Tables& t, const AudienceFilter& filter);

struct GatewayResult {
  enum class Outcome { Accepted, Rejected, TransientError };
  Outcome outcome = Outcome::Accepted;
  std::optional<std::string> provider_ref;
  std::optional<std::string> reason;
};

std::string_view to_string(GatewayResult::Outcome o);

class Gateway {
 public:
  virtual ~Gateway() = default;
  virtual GatewayResult send(const std::string& phone, const std::string& text, const std::string& idempotency_key) = 0;
};

/// Maps the provider's integer reply: 0 accepted, 1/2 rejected, else transient.
GatewayResult map_gateway_reply(int http_status, std::string_view body);

/// Form-encoded POST (1 = phone, 2 = message, 3 = api key, optional passwd);
/// the idempotency key travels in an Idempotency-Key header.
class HttpGateway : public Gateway {
 public:
  struct Options {
    std::string url;
    std::string api_key;
    std::optional<std::string> password;
    std::chrono::milliseconds timeout{5000};
  };

  explicit HttpGateway(Options options);
  GatewayResult send(const std::string& phone, const std::string& text, const std::string& idempotency_key) override;

 private:
  Options options_;
  std::string origin_;
  std::string path_;
};

/// In-process provider for tests and offline runs. Replies come from a
/// per-phone script, then the default. A key already delivered returns the
/// first result without delivering again.
class MockGateway : public Gateway {
 public:
  struct Delivery {
    std::string phone;
    std::string text;
    std::string key;
  };

  GatewayResult send(const std::string& phone, const std::string& text, const std::string& idempotency_key) override;

  void script(const std::string& phone, std::vector<GatewayResult::Outcome> outcomes);
  void set_default(GatewayResult::Outcome outcome);

  std::vector<Delivery> ledger() const;
  std::size_t calls() const;
  /// Deliveries recorded under `key` (0 or 1 by construction).
  std::size_t deliveries(const std::string& key) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<GatewayResult::Outcome>> scripts_;
  GatewayResult::Outcome default_ = GatewayResult::Outcome::Accepted;
  std::map<std::string, GatewayResult> by_key_;
  std::vector<Delivery> ledger_;
  std::size_t calls_ = 0;
  std::size_t next_ref_ = 1;
};

enum class DispatchPoint { BeforeSend, AfterSend, AfterCommit };

class Notify {
 public:
  using Sleep = std::function<void(std::chrono::milliseconds)>;

  Notify(Database& db, std::shared_ptr<Gateway> gateway);

  /// Validates the text and snapshots the audience. Throws EMPTY_MESSAGE,
  /// UNSUPPORTED_CHARSET.
  BroadcastJob create_broadcast(const std::string& message, const AudienceFilter& filter, const Officer& officer);

  /// Sends to every pending recipient. Each result is committed before the
  /// next send, so a re-run after a crash resumes where it stopped. Throws
  /// NOT_FOUND, GATEWAY_UNCONFIGURED.
  BroadcastJob dispatch(const std::string& job_id);

  BroadcastJob get_job(const std::string& job_id) const;
  std::vector<BroadcastJob> list_jobs() const;

  bool configured() const { return gateway_ != nullptr; }
  void set_sleep(Sleep sleep) { sleep_ = std::move(sleep); }
  /// Test hook; may throw SimulatedCrash.
  void set_hook(std::function<void(DispatchPoint)> hook) { hook_ = std::move(hook); }

 private:
  std::shared_ptr<std::mutex> job_lock(const std::string& job_id);

  Database& db_;
  std::shared_ptr<Gateway> gateway_;
  Sleep sleep_;
  std::function<void(DispatchPoint)> hook_;
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> job_locks_;
};

}  // namespace brgy::notify
