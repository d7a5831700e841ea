#include "brgy/service.hpp"

#include <cstdio>
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>
#include <sodium.h>

namespace brgy {

// ---------------------------------------------------------------------------
// Config

std::pair<std::string, int> parse_bind_addr(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::ConfigInvalid, "BIND_ADDR must look like host:port", {{"value", text}});
  std::string host(text.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  auto port_text = std::string(text.substr(colon + 1));
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) port = -1;
  } catch (const std::logic_error&) {
  }
  if (port < 0 || port > 65535)
    throw Error(ErrorCode::ConfigInvalid, "BIND_ADDR port must be 0-65535", {{"value", text}});
  return {host, port};
}

Config Config::from_env() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  Config c;
  if (auto bind = env("BIND_ADDR")) std::tie(c.host, c.port) = parse_bind_addr(*bind);
  c.data_dir = std::filesystem::path(env("DATA_DIR").value_or("data"));
  c.zones_file = env("ZONES_FILE").value_or("zones.json");
  c.sms_gateway_url = env("SMS_GATEWAY_URL");
  c.sms_gateway_key = env("SMS_GATEWAY_KEY");
  if (c.sms_gateway_url && !c.sms_gateway_key)
    throw Error(ErrorCode::ConfigInvalid, "SMS_GATEWAY_URL is set but SMS_GATEWAY_KEY is not");
  if (auto name = env("BARANGAY_NAME")) c.barangay_name = *name;
  return c;
}

// ---------------------------------------------------------------------------
// Access control

std::string_view to_string(Action a) {
  switch (a) {
    case Action::RegistryRead: return "registry_read";
    case Action::RegistryWrite: return "registry_write";
    case Action::BlotterWrite: return "blotter_write";
    case Action::ClearanceIssue: return "clearance_issue";
    case Action::ClearanceOverride: return "clearance_override";
    case Action::HealthWrite: return "health_write";
    case Action::StatsRead: return "stats_read";
    case Action::AnalyticsTrain: return "analytics_train";
    case Action::SmsSend: return "sms_send";
    case Action::AdvisoryPublish: return "advisory_publish";
    case Action::OpenData: return "open_data";
  }
  return "unknown";
}

bool authorize(Role role, Action action) {
  if (action == Action::OpenData) return true;
  switch (role) {
    case Role::Secretary: return true;
    case Role::Treasurer: return action == Action::ClearanceIssue || action == Action::RegistryRead;
    case Role::HealthWorker: return action == Action::HealthWrite || action == Action::RegistryRead;
    case Role::Lgu: return action == Action::StatsRead || action == Action::AdvisoryPublish;
    case Role::ResidentPublic: return false;
  }
  return false;
}

namespace {

void sodium_ready() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium failed to initialize");
}

}  // namespace

std::string hash_password(const std::string& password) {
  sodium_ready();
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str(out, password.data(), password.size(), crypto_pwhash_OPSLIMIT_INTERACTIVE,
                        crypto_pwhash_MEMLIMIT_INTERACTIVE) != 0)
    throw std::runtime_error("password hashing ran out of memory");
  return out;
}

bool verify_password(const std::string& hash, const std::string& password) {
  sodium_ready();
  return crypto_pwhash_str_verify(hash.c_str(), password.data(), password.size()) == 0;
}

std::string random_token() {
  sodium_ready();
  unsigned char bytes[16];
  randombytes_buf(bytes, sizeof bytes);
  char hex[sizeof bytes * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, bytes, sizeof bytes);
  return hex;
}

void Accounts::create_account(const std::string& username, const std::string& password, Role role,
                              std::optional<std::string> linked_resident_id) {
  auto name = trim(username);
  if (name.empty()) throw Error(ErrorCode::InvalidField, "username: required", {{"field", "username"}});
  if (password.size() < 8)
    throw Error(ErrorCode::InvalidField, "password: at least 8 characters", {{"field", "password"}});
  auto hash = hash_password(password);
  db_.write([&](const Tables& t, Batch& batch) {
    if (t.accounts.count(name)) throw Error(ErrorCode::Conflict, "username taken", {{"username", name}});
    if (linked_resident_id && !t.residents.count(*linked_resident_id))
      throw Error(ErrorCode::NotFound, "no resident " + *linked_resident_id);
    batch.emit("account_created", {{"account", UserAccount{name, hash, role, linked_resident_id}}});
  });
}

Session Accounts::authenticate(const std::string& username, const std::string& password) {
  auto account = db_.read([&](const Tables& t) -> std::optional<UserAccount> {
    auto it = t.accounts.find(username);
    if (it == t.accounts.end()) return std::nullopt;
    return it->second;
  });
  // Unknown users still pay for a hash check.
  static const std::string decoy = hash_password("decoy-password-0");
  bool ok = verify_password(account ? account->password_hash : decoy, password) && account;
  if (!ok) throw Error(ErrorCode::BadCredentials, "invalid username or password");
  Session s{random_token(), account->username, account->role, db_.now() + ttl_};
  std::lock_guard lock(mutex_);
  sessions_[s.token] = s;
  return s;
}

Session Accounts::validate(const std::string& token) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) throw Error(ErrorCode::Unauthenticated, "no such session");
  if (db_.now() >= it->second.expires_at) {
    sessions_.erase(it);
    throw Error(ErrorCode::Unauthenticated, "session expired");
  }
  return it->second;
}

std::size_t Accounts::count() const {
  return db_.read([](const Tables& t) { return t.accounts.size(); });
}

// ---------------------------------------------------------------------------
// Facade

namespace {

std::shared_ptr<notify::Gateway> gateway_from(const Config& c) {
  if (!c.sms_gateway_url) return nullptr;
  return std::make_shared<notify::HttpGateway>(
      notify::HttpGateway::Options{*c.sms_gateway_url, c.sms_gateway_key.value_or(""), std::nullopt, {}});
}

geo::ZoneMap load_zones(const Config& c) {
  try {
    return geo::ZoneMap::load(c.zones_file);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("zones file {}: {}", c.zones_file.string(), e.what()),
                e.details());
  }
}

}  // namespace

System::System(const Config& config, std::shared_ptr<notify::Gateway> gateway, Clock clock)
    : System(config, load_zones(config), std::move(gateway), std::move(clock)) {}

System::System(const Config& config, geo::ZoneMap zone_map, std::shared_ptr<notify::Gateway> gateway, Clock clock)
    : db(Database::Options{config.data_dir, std::move(clock)}),
      zones(std::move(zone_map)),
      registry(db, zones.zone_ids()),
      casework(db, zones, config.barangay_name),
      health(db, zones),
      notify(db, gateway ? std::move(gateway) : gateway_from(config)),
      accounts(db, config.session_ttl) {}

std::string System::export_dataset(const std::string& dataset_id, const DateWindow& window) const {
  if (window.empty()) throw Error(ErrorCode::InvalidField, "window is empty", {{"field", "window"}});
  return db.read([&](const Tables& t) { return opendata::export_csv(t, zones.zone_ids(), dataset_id, window); });
}

System::TrainResult System::train(analytics::Task task, analytics::Learner learner, std::size_t k,
                                  std::uint64_t seed, analytics::TrainOptions options) {
  using namespace analytics;
  auto data = db.read([&](const Tables& t) { return derive_task_dataset(t, task, date_of(db.now())); });
  if (data.records.empty()) throw Error(ErrorCode::EmptyDataset, "no records for this task yet");
  TrainResult out;
  out.report = cross_validate(data, learner, k, seed, options);
  if (learner == Learner::NaiveBayes) {
    out.model = to_json(train_naive_bayes(data, options.alpha));
  } else {
    int depth = options.max_depth > 0 ? options.max_depth : static_cast<int>(data.schema.features.size());
    out.model = to_json(train_decision_tree(data, depth, options.min_samples_leaf));
  }
  std::lock_guard lock(training_mutex_);
  trained_[task] = json{{"task", to_string(task)}, {"evaluation", to_json(out.report)}, {"model", out.model}};
  return out;
}

std::optional<json> System::last_training(analytics::Task task) const {
  std::lock_guard lock(training_mutex_);
  auto it = trained_.find(task);
  if (it == trained_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// HTTP

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::BadCredentials:
    case ErrorCode::Unauthenticated: return 401;
    case ErrorCode::Forbidden:
    case ErrorCode::OverrideForbidden: return 403;
    case ErrorCode::IllegalTransition:
    case ErrorCode::NotIssued:
    case ErrorCode::GatewayUnconfigured:
    case ErrorCode::Conflict: return 409;
    case ErrorCode::EmptyDataset:
    case ErrorCode::UnknownLabel:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::TooFewRecords:
    case ErrorCode::InsufficientClasses: return 422;
    default: return 400;
  }
}

json error_envelope(const Error& e) {
  return json{{"code", to_string(e.code())}, {"message", e.what()}, {"details", e.details()}};
}

namespace {

using Req = httplib::Request;
using Res = httplib::Response;

void send_json(Res& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(Res& res, const Error& e) { send_json(res, error_envelope(e), http_status(e.code())); }

json body_of(const Req& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidField, "request body must be a JSON object");
  return j;
}

std::optional<std::string> param(const Req& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

std::optional<Date> date_param(const Req& req, const char* name) {
  auto v = param(req, name);
  if (!v || v->empty()) return std::nullopt;
  auto d = parse_date(*v);
  if (!d) throw Error(ErrorCode::InvalidField, fmt::format("{}: expected YYYY-MM-DD", name), {{"field", name}});
  return d;
}

DateWindow window_of(const Req& req) {
  DateWindow w{date_param(req, "from"), date_param(req, "to")};
  if (w.empty()) throw Error(ErrorCode::InvalidField, "from is after to", {{"field", "from"}});
  return w;
}

long long int_param(const Req& req, const char* name, long long fallback, long long lo, long long hi) {
  auto v = param(req, name);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    long long n = std::stoll(*v, &used);
    if (used == v->size() && n >= lo && n <= hi) return n;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorCode::InvalidField, fmt::format("{}: expected an integer in [{}, {}]", name, lo, hi),
              {{"field", name}});
}

double double_param(const Req& req, const char* name, double fallback) {
  auto v = param(req, name);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double d = std::stod(*v, &used);
    if (used == v->size() && std::isfinite(d)) return d;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorCode::InvalidField, fmt::format("{}: expected a number", name), {{"field", name}});
}

std::optional<std::string> bearer_token(const Req& req) {
  auto auth = req.get_header_value("Authorization");
  if (auth.rfind("Bearer ", 0) == 0) return trim(auth.substr(7));
  auto cookies = req.get_header_value("Cookie");
  for (std::size_t pos = 0; pos < cookies.size();) {
    auto end = cookies.find(';', pos);
    auto part = trim(std::string_view(cookies).substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    if (part.rfind("session=", 0) == 0) return part.substr(8);
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return std::nullopt;
}

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw Error(ErrorCode::InvalidField, fmt::format("{}: required", name), {{"field", name}});
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidField, fmt::format("{}: wrong type", name), {{"field", name}});
  }
}

Date date_field(const json& j, const char* name) {
  auto d = parse_date(field<std::string>(j, name));
  if (!d) throw Error(ErrorCode::InvalidField, fmt::format("{}: expected YYYY-MM-DD", name), {{"field", name}});
  return *d;
}

GeoPoint point_field(const json& j, const char* name) {
  auto p = field<json>(j, name);
  if (!p.is_object()) throw Error(ErrorCode::InvalidField, fmt::format("{}: expected {{lat, lon}}", name), {{"field", name}});
  return GeoPoint{field<double>(p, "lat"), field<double>(p, "lon")};
}

Resident resident_from(const json& j) {
  Resident r;
  r.last_name = field<std::string>(j, "last_name");
  r.first_name = field<std::string>(j, "first_name");
  r.middle_name = j.contains("middle_name") ? field<std::string>(j, "middle_name") : "";
  r.birthdate = date_field(j, "birthdate");
  auto g = parse_gender(field<std::string>(j, "gender"));
  if (!g) throw Error(ErrorCode::InvalidField, "gender: expected male or female", {{"field", "gender"}});
  r.gender = *g;
  r.occupation = j.contains("occupation") ? field<std::string>(j, "occupation") : "";
  auto rs = parse_residency(field<std::string>(j, "residency_status"));
  if (!rs)
    throw Error(ErrorCode::InvalidField, "residency_status: expected migrant or non_migrant",
                {{"field", "residency_status"}});
  r.residency_status = *rs;
  r.zone_id = field<int>(j, "zone_id");
  r.address = j.contains("address") ? field<std::string>(j, "address") : "";
  if (j.contains("mobile_number") && !j.at("mobile_number").is_null())
    r.mobile_number = field<std::string>(j, "mobile_number");
  return r;
}

BlotterFiling filing_from(const json& j) {
  BlotterFiling f;
  f.complainant_ids = field<std::vector<std::string>>(j, "complainant_ids");
  f.respondent_ids = field<std::vector<std::string>>(j, "respondent_ids");
  f.offense_type = field<std::string>(j, "offense_type");
  f.narrative = j.contains("narrative") ? field<std::string>(j, "narrative") : "";
  f.location = point_field(j, "location");
  if (j.contains("zone_id") && !j.at("zone_id").is_null()) f.zone_id = field<int>(j, "zone_id");
  f.date_filed = date_field(j, "date_filed");
  if (j.contains("factors")) {
    auto factors = field<json>(j, "factors");
    if (!factors.is_object()) throw Error(ErrorCode::InvalidField, "factors: expected an object", {{"field", "factors"}});
    for (const auto& [id, v] : factors.items()) {
      try {
        f.factors[id] = factor_input_from_json(v);
      } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidField, "factors: wrong type", {{"field", "factors"}, {"resident_id", id}});
      }
    }
  }
  return f;
}

AudienceFilter audience_from(const json& j) {
  if (!j.contains("audience")) return {};
  try {
    return j.at("audience").get<AudienceFilter>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidField, "audience: expected {kind, zone_id | resident_ids}", {{"field", "audience"}});
  }
}

void log_request(const Req& req, const Res& res) {
  json line{{"ts", format_timestamp(system_clock()())},
            {"method", req.method},
            {"path", req.path},
            {"status", res.status},
            {"remote", req.remote_addr},
            {"bytes", res.body.size()}};
  std::fprintf(stderr, "%s\n", line.dump().c_str());
}

}  // namespace

HttpService::HttpService(System& system) : sys_(system), server_(std::make_unique<httplib::Server>()) { mount(); }

HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::BindFailure, fmt::format("cannot bind {}:{}", host, port));
  return bound;
}

void HttpService::run() { server_->listen_after_bind(); }
void HttpService::stop() { server_->stop(); }

void HttpService::mount() {
  auto& srv = *server_;
  srv.set_logger(log_request);
  srv.set_error_handler([](const Req&, Res& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    auto code = res.status == 404 ? ErrorCode::NotFound : ErrorCode::InvalidField;
    send_json(res, error_envelope(Error(code, res.status == 404 ? "no such route" : "bad request")), res.status);
    return httplib::Server::HandlerResponse::Handled;
  });
  srv.set_exception_handler([](const Req&, Res& res, std::exception_ptr) {
    send_json(res, json{{"code", "INTERNAL"}, {"message", "internal error"}, {"details", json::object()}}, 500);
  });

  using Body = std::function<void(const Req&, Res&, const Officer&)>;
  // Session check, role check, uniform error mapping.
  auto guarded = [this](std::optional<Action> action, Body body) {
    return [this, action, body = std::move(body)](const Req& req, Res& res) {
      try {
        Officer officer;
        if (action != Action::OpenData) {
          auto token = bearer_token(req);
          if (!token) throw Error(ErrorCode::Unauthenticated, "sign in first");
          auto s = sys_.accounts.validate(*token);
          officer = {s.username, s.role};
          if (action && !authorize(s.role, *action))
            throw Error(ErrorCode::Forbidden, fmt::format("role {} may not {}", to_string(s.role), to_string(*action)),
                        {{"action", to_string(*action)}});
        }
        body(req, res, officer);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const json::exception& e) {
        send_error(res, Error(ErrorCode::InvalidField, e.what()));
      }
    };
  };
  auto open = [&](Body body) { return guarded(Action::OpenData, std::move(body)); };
  auto need = [&](Action a, Body body) { return guarded(a, std::move(body)); };

  srv.Get("/api/health-check", open([](const Req&, Res& res, const Officer&) {
    send_json(res, {{"status", "ok"}});
  }));

  srv.Post("/api/sessions", open([this](const Req& req, Res& res, const Officer&) {
    auto j = body_of(req);
    auto s = sys_.accounts.authenticate(field<std::string>(j, "username"), field<std::string>(j, "password"));
    res.set_header("Set-Cookie", fmt::format("session={}; HttpOnly; Path=/; SameSite=Strict", s.token));
    send_json(res,
              {{"token", s.token},
               {"username", s.username},
               {"role", to_string(s.role)},
               {"expires_at", format_timestamp(s.expires_at)}},
              201);
  }));

  // Registry
  srv.Get("/api/residents", need(Action::RegistryRead, [this](const Req& req, Res& res, const Officer&) {
    Page page{static_cast<std::size_t>(int_param(req, "offset", 0, 0, 1'000'000'000)),
              static_cast<std::size_t>(int_param(req, "limit", 100, 1, 10'000))};
    auto rows = sys_.registry.find_residents(param(req, "q").value_or(""), page);
    send_json(res, {{"residents", rows}, {"total", sys_.registry.size()}});
  }));
  srv.Post("/api/residents", need(Action::RegistryWrite, [this](const Req& req, Res& res, const Officer&) {
    auto reg = sys_.registry.register_resident(resident_from(body_of(req)));
    send_json(res, {{"resident_id", reg.resident_id}, {"duplicate_warning", reg.duplicate_warning}}, 201);
  }));
  srv.Get(R"(/api/residents/([^/]+))", need(Action::RegistryRead, [this](const Req& req, Res& res, const Officer&) {
    auto p = sys_.registry.get_profile(req.matches[1]);
    send_json(res, {{"resident", p.resident}, {"history", p.history}});
  }));
  srv.Get(R"(/api/residents/([^/]+)/history)",
          need(Action::RegistryRead, [this](const Req& req, Res& res, const Officer&) {
            send_json(res, {{"history", sys_.registry.get_profile(req.matches[1]).history}});
          }));

  // Casework
  srv.Post("/api/blotter", need(Action::BlotterWrite, [this](const Req& req, Res& res, const Officer&) {
    auto number = sys_.casework.file_blotter(filing_from(body_of(req)));
    send_json(res, {{"case_number", number}, {"case", sys_.casework.get_case(number)}}, 201);
  }));
  srv.Get(R"(/api/blotter/([^/]+))", need(Action::BlotterWrite, [this](const Req& req, Res& res, const Officer&) {
    send_json(res, sys_.casework.get_case(req.matches[1]));
  }));
  srv.Patch(R"(/api/blotter/([^/]+))", need(Action::BlotterWrite, [this](const Req& req, Res& res, const Officer& o) {
    auto j = body_of(req);
    auto status = parse_case_status(field<std::string>(j, "status"));
    if (!status)
      throw Error(ErrorCode::InvalidField, "status: expected open, settled, referred or dismissed",
                  {{"field", "status"}});
    sys_.casework.update_case_status(req.matches[1], *status, o);
    send_json(res, sys_.casework.get_case(req.matches[1]));
  }));
  srv.Post("/api/clearance", need(Action::ClearanceIssue, [this](const Req& req, Res& res, const Officer& o) {
    auto j = body_of(req);
    auto kind = CertificateKind::Clearance;
    if (j.contains("kind")) {
      auto k = parse_certificate_kind(field<std::string>(j, "kind"));
      if (!k) throw Error(ErrorCode::InvalidField, "kind: expected clearance or certification", {{"field", "kind"}});
      kind = *k;
    }
    bool override_cases = j.contains("override") && field<bool>(j, "override");
    auto cert = sys_.casework.issue_clearance(field<std::string>(j, "resident_id"), kind,
                                              field<std::string>(j, "purpose"), o, override_cases);
    json out = cert;
    if (cert.outcome == CertificateOutcome::Issued)
      out["certificate_text"] = sys_.casework.render_certificate(cert.certificate_id);
    send_json(res, out, 201);
  }));
  srv.Get(R"(/api/clearance/([^/]+))", need(Action::ClearanceIssue, [this](const Req& req, Res& res, const Officer&) {
    std::string id = req.matches[1];
    send_json(res, {{"resident_id", id},
                    {"certificates", sys_.casework.clearance_history(id)},
                    {"blocking_cases", sys_.casework.blocking_cases(id)}});
  }));

  // Health
  srv.Post("/api/health/cases", need(Action::HealthWrite, [this](const Req& req, Res& res, const Officer& o) {
    auto j = body_of(req);
    HealthCaseInput in;
    auto subject = field<json>(j, "subject");
    if (!subject.is_object()) throw Error(ErrorCode::InvalidField, "subject: expected {kind, id}", {{"field", "subject"}});
    auto kind = field<std::string>(subject, "kind");
    if (kind != "resident" && kind != "child")
      throw Error(ErrorCode::InvalidField, "subject.kind: expected resident or child", {{"field", "subject"}});
    in.subject = {kind == "child" ? HealthSubject::Kind::Child : HealthSubject::Kind::Resident,
                  field<std::string>(subject, "id")};
    in.condition = field<std::string>(j, "condition");
    in.notes = j.contains("notes") ? field<std::string>(j, "notes") : "";
    in.location = point_field(j, "location");
    if (j.contains("zone_id") && !j.at("zone_id").is_null()) in.zone_id = field<int>(j, "zone_id");
    auto id = sys_.health.record_health_case(in, o);
    send_json(res, {{"health_case_id", id}}, 201);
  }));
  srv.Post("/api/health/children", need(Action::HealthWrite, [this](const Req& req, Res& res, const Officer&) {
    auto j = body_of(req);
    ChildRecord c;
    c.last_name = field<std::string>(j, "last_name");
    c.first_name = j.contains("first_name") ? field<std::string>(j, "first_name") : "";
    c.middle_name = j.contains("middle_name") ? field<std::string>(j, "middle_name") : "";
    c.birthdate = date_field(j, "birthdate");
    auto g = parse_gender(field<std::string>(j, "gender"));
    if (!g) throw Error(ErrorCode::InvalidField, "gender: expected male or female", {{"field", "gender"}});
    c.gender = *g;
    if (j.contains("guardian_resident_id") && !j.at("guardian_resident_id").is_null())
      c.guardian_resident_id = field<std::string>(j, "guardian_resident_id");
    send_json(res, {{"child_id", sys_.health.register_child(c)}}, 201);
  }));
  srv.Get("/api/health/summary", need(Action::StatsRead, [this](const Req& req, Res& res, const Officer&) {
    auto g = parse_health_grouping(param(req, "group_by").value_or("zone"));
    if (!g) throw Error(ErrorCode::InvalidField, "group_by: expected zone or condition", {{"field", "group_by"}});
    send_json(res, {{"counts", sys_.health.health_summary(window_of(req), *g)}});
  }));

  // Geo
  auto marker_kind = [](const Req& req) {
    auto k = geo::parse_marker_kind(param(req, "kind").value_or("crime"));
    if (!k) throw Error(ErrorCode::InvalidField, "kind: expected crime or health", {{"field", "kind"}});
    return *k;
  };
  srv.Get("/api/geo/zones", need(Action::StatsRead, [this](const Req&, Res& res, const Officer&) {
    send_json(res, sys_.zones.to_json());
  }));
  srv.Get("/api/geo/markers", need(Action::StatsRead, [this, marker_kind](const Req& req, Res& res, const Officer&) {
    auto kind = marker_kind(req);
    auto w = window_of(req);
    auto markers = sys_.db.read([&](const Tables& t) { return geo::build_markers(t, kind, w); });
    json out = json::array();
    for (const auto& m : markers) out.push_back(geo::to_json(m));
    send_json(res, {{"markers", out}});
  }));
  srv.Get("/api/geo/hotspots", need(Action::StatsRead, [this, marker_kind](const Req& req, Res& res, const Officer&) {
    auto kind = marker_kind(req);
    auto w = window_of(req);
    double cell = double_param(req, "cell", 100.0);
    auto k = static_cast<std::size_t>(int_param(req, "k", 5, 1, 1'000'000));
    auto markers = sys_.db.read([&](const Tables& t) { return geo::build_markers(t, kind, w); });
    auto grid = geo::detect_hotspots(sys_.zones, markers, cell, k);
    send_json(res, geo::to_json(grid));
  }));

  // Analytics
  srv.Get("/api/analytics/chart", need(Action::StatsRead, [this](const Req& req, Res& res, const Officer&) {
    auto g = analytics::parse_chart_grouping(param(req, "group_by").value_or("offense_type"));
    if (!g)
      throw Error(ErrorCode::InvalidField, "group_by: expected offense_type, zone, month or residency_status",
                  {{"field", "group_by"}});
    auto w = window_of(req);
    send_json(res, {{"counts", sys_.db.read([&](const Tables& t) { return analytics::crime_chart(t, w, *g); })}});
  }));
  srv.Post("/api/analytics/train", need(Action::AnalyticsTrain, [this](const Req& req, Res& res, const Officer&) {
    auto j = body_of(req);
    auto task = analytics::parse_task(field<std::string>(j, "task"));
    if (!task) throw Error(ErrorCode::InvalidField, "task: expected reoffend or offend_by_residency", {{"field", "task"}});
    auto learner = analytics::parse_learner(j.contains("learner") ? field<std::string>(j, "learner") : "nb");
    if (!learner) throw Error(ErrorCode::InvalidField, "learner: expected nb or tree", {{"field", "learner"}});
    analytics::TrainOptions opt;
    if (j.contains("alpha")) opt.alpha = field<double>(j, "alpha");
    if (j.contains("max_depth")) opt.max_depth = field<int>(j, "max_depth");
    if (j.contains("min_samples_leaf")) opt.min_samples_leaf = field<std::size_t>(j, "min_samples_leaf");
    auto k = j.contains("k") ? field<std::size_t>(j, "k") : 10;
    auto seed = j.contains("seed") ? field<std::uint64_t>(j, "seed") : 1;
    auto result = sys_.train(*task, *learner, k, seed, opt);
    send_json(res, {{"task", analytics::to_string(*task)},
                    {"evaluation", analytics::to_json(result.report)},
                    {"model", result.model}});
  }));
  srv.Get("/api/analytics/report", need(Action::StatsRead, [this](const Req& req, Res& res, const Officer&) {
    auto task = analytics::parse_task(param(req, "task").value_or(""));
    if (!task) throw Error(ErrorCode::InvalidField, "task: expected reoffend or offend_by_residency", {{"field", "task"}});
    auto data = sys_.db.read([&](const Tables& t) { return analytics::derive_task_dataset(t, *task, date_of(sys_.db.now())); });
    if (data.records.empty()) throw Error(ErrorCode::EmptyDataset, "no records for this task yet");
    json out = analytics::to_json(analytics::likelihood_report(data, *task));
    if (auto last = sys_.last_training(*task)) out["last_training"] = (*last)["evaluation"];
    send_json(res, out);
  }));

  // Notify
  srv.Post("/api/broadcasts", need(Action::SmsSend, [this](const Req& req, Res& res, const Officer& o) {
    auto j = body_of(req);
    auto job = sys_.notify.create_broadcast(field<std::string>(j, "message"), audience_from(j), o);
    json out = job;
    out["segments"] = notify::segment_message(job.message).size();
    send_json(res, out, 201);
  }));
  srv.Get(R"(/api/broadcasts/([^/]+))", need(Action::SmsSend, [this](const Req& req, Res& res, const Officer&) {
    send_json(res, sys_.notify.get_job(req.matches[1]));
  }));
  srv.Post(R"(/api/broadcasts/([^/]+)/dispatch)", need(Action::SmsSend, [this](const Req& req, Res& res, const Officer&) {
    send_json(res, sys_.notify.dispatch(req.matches[1]));
  }));

  // Open data
  srv.Get("/api/opendata", open([this](const Req&, Res& res, const Officer&) {
    json datasets = json::array();
    for (const auto& d : opendata::list_datasets()) datasets.push_back(opendata::to_json(d));
    auto advisories = sys_.db.read([](const Tables& t) { return opendata::list_advisories(t); });
    send_json(res, {{"datasets", datasets}, {"advisories", advisories}});
  }));
  srv.Get(R"(/api/opendata/([a-z_]+)\.csv)", open([this](const Req& req, Res& res, const Officer&) {
    std::string id = req.matches[1];
    auto bytes = sys_.export_dataset(id, window_of(req));
    res.set_header("Content-Disposition", fmt::format("attachment; filename=\"{}.csv\"", id));
    res.set_content(bytes, "text/csv; charset=utf-8");
  }));
  srv.Post("/api/advisories", need(Action::AdvisoryPublish, [this](const Req& req, Res& res, const Officer& o) {
    auto j = body_of(req);
    auto title = j.contains("title") ? field<std::string>(j, "title") : "";
    auto text = j.contains("body") ? field<std::string>(j, "body") : "";
    bool broadcast = j.contains("broadcast") && field<bool>(j, "broadcast");
    if (broadcast) {
      if (!authorize(o.role, Action::SmsSend))
        throw Error(ErrorCode::Forbidden, "only the secretary may broadcast SMS", {{"action", "sms_send"}});
      if (!trim(text).empty()) notify::segment_message(text);
    }
    auto a = opendata::publish_advisory(sys_.db, title, text, o);
    json out = a;
    if (broadcast) out["broadcast"] = sys_.notify.create_broadcast(a.body, audience_from(j), o);
    send_json(res, out, 201);
  }));
}

}  // namespace brgy
