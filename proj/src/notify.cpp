#include "brgy/notify.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

namespace brgy::notify {

namespace {

// GSM 03.38 default alphabet, as Unicode code points.
const std::set<char32_t>& basic_set() {
  static const std::set<char32_t> s = [] {
    std::set<char32_t> out{U'@', U'£', U'$', U'¥', U'è', U'é', U'ù', U'ì', U'ò', U'Ç', U'\n', U'Ø', U'ø', U'\r',
                           U'Å', U'å', U'Δ', U'_', U'Φ', U'Γ', U'Λ', U'Ω', U'Π', U'Ψ', U'Σ', U'Θ', U'Ξ', U'Æ',
                           U'æ', U'ß', U'É', U'¤', U'¡', U'Ä', U'Ö', U'Ñ', U'Ü', U'§', U'¿', U'ä', U'ö', U'ñ',
                           U'ü', U'à'};
    for (char32_t c = 0x20; c <= 0x7E; ++c) {
      if (c == U'`' || c == U'[' || c == U'\\' || c == U']' || c == U'^' || c == U'{' || c == U'|' ||
          c == U'}' || c == U'~')
        continue;
      out.insert(c);
    }
    return out;
  }();
  return s;
}

const std::set<char32_t> kExtension{U'^', U'{', U'}', U'\\', U'[', U'~', U']', U'|', U'€', U'\f'};

struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t bytes;
};

[[noreturn]] void unsupported(std::string_view why) { throw Error(ErrorCode::UnsupportedCharset, std::string(why)); }

std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto b = static_cast<unsigned char>(s[i]);
    std::size_t n = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    if (n == 0 || i + n > s.size()) unsupported("message is not valid UTF-8");
    char32_t cp = n == 1 ? b : n == 2 ? (b & 0x1F) : n == 3 ? (b & 0x0F) : (b & 0x07);
    for (std::size_t k = 1; k < n; ++k) {
      auto c = static_cast<unsigned char>(s[i + k]);
      if ((c >> 6) != 0x2) unsupported("message is not valid UTF-8");
      cp = (cp << 6) | (c & 0x3F);
    }
    out.push_back({cp, i, n});
    i += n;
  }
  return out;
}

std::size_t septets(char32_t c) {
  if (basic_set().count(c)) return 1;
  if (kExtension.count(c)) return 2;
  unsupported(fmt::format("character U+{:04X} is outside the GSM-7 alphabet", static_cast<std::uint32_t>(c)));
}

}  // namespace

std::size_t gsm7_length(std::string_view utf8) {
  std::size_t n = 0;
  for (const auto& cp : decode_utf8(utf8)) n += septets(cp.value);
  return n;
}

std::vector<std::string> segment_message(std::string_view utf8) {
  if (utf8.empty()) throw Error(ErrorCode::EmptyMessage, "message is empty");
  auto cps = decode_utf8(utf8);
  std::size_t total = 0;
  for (const auto& cp : cps) total += septets(cp.value);
  if (total <= kSingleSegment) return {std::string(utf8)};

  std::vector<std::string> out;
  std::size_t start = 0, used = 0;
  for (const auto& cp : cps) {
    auto w = septets(cp.value);
    if (used + w > kMultiSegment) {
      out.emplace_back(utf8.substr(start, cp.offset - start));
      start = cp.offset;
      used = 0;
    }
    used += w;
  }
  out.emplace_back(utf8.substr(start));
  return out;
}

std::vector<AudienceMember> resolve_audience(const Tables& t, const AudienceFilter& filter) {
  std::set<std::string> wanted(filter.resident_ids.begin(), filter.resident_ids.end());
  std::set<std::string> phones;
  std::vector<AudienceMember> out;
  for (const auto& [id, r] : t.residents) {
    if (!r.mobile_number || r.mobile_number->empty()) continue;
    if (filter.kind == AudienceFilter::Kind::Zone && r.zone_id != filter.zone_id) continue;
    if (filter.kind == AudienceFilter::Kind::Residents && !wanted.count(id)) continue;
    if (!phones.insert(*r.mobile_number).second) continue;
    out.push_back({id, *r.mobile_number});
  }
  return out;
}

std::string_view to_string(GatewayResult::Outcome o) {
  switch (o) {
    case GatewayResult::Outcome::Accepted: return "accepted";
    case GatewayResult::Outcome::Rejected: return "rejected";
    case GatewayResult::Outcome::TransientError: return "transient_error";
  }
  return "transient_error";
}

GatewayResult map_gateway_reply(int http_status, std::string_view body) {
  using O = GatewayResult::Outcome;
  if (http_status != 200) return {O::TransientError, std::nullopt, fmt::format("gateway http status {}", http_status)};
  auto text = trim(body);
  int code = -1;
  try {
    std::size_t used = 0;
    code = std::stoi(text, &used);
    if (used != text.size()) code = -1;
  } catch (const std::logic_error&) {
    code = -1;
  }
  switch (code) {
    case 0: return {O::Accepted, std::nullopt, std::nullopt};
    case 1: return {O::Rejected, std::nullopt, "invalid number"};
    case 2: return {O::Rejected, std::nullopt, "gateway rejected credentials"};
    default: return {O::TransientError, std::nullopt, fmt::format("gateway replied '{}'", text)};
  }
}

HttpGateway::HttpGateway(Options options) : options_(std::move(options)) {
  auto scheme = options_.url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "SMS gateway URL needs a scheme");
  auto slash = options_.url.find('/', scheme + 3);
  origin_ = options_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : options_.url.substr(slash);
}

GatewayResult HttpGateway::send(const std::string& phone, const std::string& text, const std::string& key) {
  httplib::Client client(origin_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Params form{{"1", phone}, {"2", text}, {"3", options_.api_key}};
  if (options_.password) form.emplace("passwd", *options_.password);
  httplib::Headers headers{{"Idempotency-Key", key}};
  auto res = client.Post(path_, headers, form);
  if (!res)
    return {GatewayResult::Outcome::TransientError, std::nullopt,
            "gateway unreachable: " + httplib::to_string(res.error())};
  return map_gateway_reply(res->status, res->body);
}

GatewayResult MockGateway::send(const std::string& phone, const std::string& text, const std::string& key) {
  std::lock_guard lock(mutex_);
  ++calls_;
  if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;

  auto outcome = default_;
  if (auto it = scripts_.find(phone); it != scripts_.end() && !it->second.empty()) {
    outcome = it->second.front();
    it->second.pop_front();
  }
  switch (outcome) {
    case GatewayResult::Outcome::Accepted: {
      GatewayResult r{outcome, fmt::format("mock-{}", next_ref_++), std::nullopt};
      by_key_[key] = r;
      ledger_.push_back({phone, text, key});
      return r;
    }
    case GatewayResult::Outcome::Rejected: {
      GatewayResult r{outcome, std::nullopt, "invalid number"};
      by_key_[key] = r;
      return r;
    }
    case GatewayResult::Outcome::TransientError: break;
  }
  return {GatewayResult::Outcome::TransientError, std::nullopt, "timeout"};
}

void MockGateway::script(const std::string& phone, std::vector<GatewayResult::Outcome> outcomes) {
  std::lock_guard lock(mutex_);
  auto& q = scripts_[phone];
  q.insert(q.end(), outcomes.begin(), outcomes.end());
}

void MockGateway::set_default(GatewayResult::Outcome outcome) {
  std::lock_guard lock(mutex_);
  default_ = outcome;
}

std::vector<MockGateway::Delivery> MockGateway::ledger() const {
  std::lock_guard lock(mutex_);
  return ledger_;
}

std::size_t MockGateway::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::size_t MockGateway::deliveries(const std::string& key) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(ledger_.begin(), ledger_.end(), [&](const Delivery& d) { return d.key == key; }));
}

// ---------------------------------------------------------------------------

Notify::Notify(Database& db, std::shared_ptr<Gateway> gateway)
    : db_(db), gateway_(std::move(gateway)), sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

BroadcastJob Notify::create_broadcast(const std::string& message, const AudienceFilter& filter, const Officer& officer) {
  segment_message(message);
  return db_.write([&](const Tables& t, Batch& batch) {
    BroadcastJob job;
    job.job_id = sequence_id("SMS-", t.broadcasts.size() + 1);
    job.message = message;
    job.filter = filter;
    job.created_by = officer.username;
    job.created_at = db_.now();
    for (auto& m : resolve_audience(t, filter)) {
      Recipient r;
      r.resident_id = m.resident_id;
      r.phone = m.phone;
      r.idempotency_key = fmt::format("{}/{}", job.job_id, m.phone);
      job.recipients.push_back(std::move(r));
    }
    batch.emit("broadcast_created", {{"job", job}});
    return job;
  });
}

BroadcastJob Notify::get_job(const std::string& job_id) const {
  return db_.read([&](const Tables& t) {
    auto it = t.broadcasts.find(job_id);
    if (it == t.broadcasts.end()) throw Error(ErrorCode::NotFound, "no broadcast " + job_id, {{"job_id", job_id}});
    return it->second;
  });
}

std::vector<BroadcastJob> Notify::list_jobs() const {
  return db_.read([](const Tables& t) {
    std::vector<BroadcastJob> out;
    for (const auto& [id, job] : t.broadcasts) out.push_back(job);
    return out;
  });
}

std::shared_ptr<std::mutex> Notify::job_lock(const std::string& job_id) {
  std::lock_guard lock(locks_mutex_);
  auto& m = job_locks_[job_id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

BroadcastJob Notify::dispatch(const std::string& job_id) {
  get_job(job_id);
  if (!gateway_) throw Error(ErrorCode::GatewayUnconfigured, "no SMS gateway is configured");
  auto mutex = job_lock(job_id);
  std::lock_guard guard(*mutex);

  auto job = get_job(job_id);
  auto segments = segment_message(job.message);
  auto hook = [&](DispatchPoint p) {
    if (hook_) hook_(p);
  };

  for (std::size_t i = 0; i < job.recipients.size(); ++i) {
    auto r = job.recipients[i];
    while (r.status == RecipientStatus::Pending) {
      GatewayResult result;
      if (r.attempts >= kRetryLimit) {
        result = {GatewayResult::Outcome::TransientError, std::nullopt, r.last_error.value_or("retry limit reached")};
      } else {
        hook(DispatchPoint::BeforeSend);
        for (std::size_t s = 0; s < segments.size(); ++s) {
          auto part = gateway_->send(r.phone, segments[s], fmt::format("{}:{}", r.idempotency_key, s));
          if (part.outcome != GatewayResult::Outcome::Accepted) {
            result = part;
            break;
          }
          if (s == 0) result = part;
        }
        hook(DispatchPoint::AfterSend);
        ++r.attempts;
      }

      switch (result.outcome) {
        case GatewayResult::Outcome::Accepted:
          r.status = RecipientStatus::Sent;
          r.provider_ref = result.provider_ref;
          r.last_error.reset();
          break;
        case GatewayResult::Outcome::Rejected:
          r.status = RecipientStatus::Failed;
          r.last_error = result.reason;
          break;
        case GatewayResult::Outcome::TransientError:
          r.last_error = result.reason;
          if (r.attempts >= kRetryLimit) r.status = RecipientStatus::Failed;
          break;
      }

      db_.write([&](const Tables&, Batch& batch) {
        batch.emit("recipient_updated", {{"job_id", job_id}, {"index", i}, {"recipient", r}});
        if (r.status == RecipientStatus::Sent)
          batch.emit("transaction_appended",
                     {{"entry", TransactionEntry{r.resident_id, TransactionKind::SmsSent, job_id, db_.now()}}});
      });
      job.recipients[i] = r;
      hook(DispatchPoint::AfterCommit);

      if (r.status == RecipientStatus::Pending) sleep_(std::chrono::milliseconds(1000 << (r.attempts - 1)));
    }
  }
  return job;
}

}  // namespace brgy::notify
