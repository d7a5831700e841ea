#include "brgy/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace brgy {

namespace {

[[noreturn]] void io_fail(const std::string& what) {
  throw std::runtime_error(fmt::format("{}: {}", what, std::strerror(errno)));
}

}  // namespace

Journal::Journal(std::filesystem::path file) : path_(std::move(file)) {
  std::filesystem::create_directories(path_.parent_path());

  std::string content;
  {
    std::ifstream in(path_, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      content = ss.str();
    }
  }

  std::size_t good_end = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    auto line = std::string_view(content).substr(pos, nl - pos);
    auto parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      if (nl + 1 == content.size()) break;
      throw Error(ErrorCode::ConfigInvalid, fmt::format("journal corrupt at byte {}", pos));
    }
    recovered_.push_back(std::move(parsed));
    good_end = nl + 1;
    pos = nl + 1;
  }

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_fail("open journal");
  if (good_end != content.size()) {
    if (::ftruncate(fd_, static_cast<off_t>(good_end)) != 0) io_fail("truncate journal");
    if (::fsync(fd_) != 0) io_fail("fsync journal");
  }
  int dir = ::open(path_.parent_path().c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (dir >= 0) {
    ::fsync(dir);
    ::close(dir);
  }
}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

void Journal::append(const json& commit) {
  std::string line = commit.dump() + "\n";
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    auto n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write journal");
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fdatasync(fd_) != 0) io_fail("fdatasync journal");
}

void Batch::emit(std::string type, json payload) {
  payload["type"] = std::move(type);
  events_.push_back(std::move(payload));
}

bool Tables::reference_exists(TransactionKind kind, const std::string& id) const {
  switch (kind) {
    case TransactionKind::ClearanceIssued:
    case TransactionKind::ClearanceDenied: return certificates.count(id) > 0;
    case TransactionKind::BlotterComplainant:
    case TransactionKind::BlotterRespondent: return cases.count(id) > 0;
    case TransactionKind::HealthCase: return health_cases.count(id) > 0;
    case TransactionKind::SmsSent: return broadcasts.count(id) > 0;
  }
  return false;
}

void apply_event(Tables& t, const json& e) {
  const auto& type = e.at("type").get_ref<const std::string&>();
  if (type == "resident_registered") {
    auto r = e.at("resident").get<Resident>();
    t.history[r.resident_id];
    t.residents[r.resident_id] = std::move(r);
  } else if (type == "transaction_appended") {
    auto entry = e.at("entry").get<TransactionEntry>();
    t.history[entry.resident_id].push_back(std::move(entry));
  } else if (type == "case_filed") {
    auto c = e.at("case").get<BlotterCase>();
    t.case_order.push_back(c.case_number);
    t.cases[c.case_number] = std::move(c);
  } else if (type == "case_status_changed") {
    auto& c = t.cases.at(e.at("case_number").get<std::string>());
    CaseNote note;
    note.at = *parse_timestamp(e.at("at").get<std::string>());
    note.officer = e.at("officer").get<std::string>();
    note.from = c.status;
    note.to = *parse_case_status(e.at("status").get<std::string>());
    c.status = note.to;
    c.notes.push_back(std::move(note));
  } else if (type == "certificate_recorded") {
    auto c = e.at("certificate").get<Certificate>();
    t.certificates_by_resident[c.resident_id].push_back(c.certificate_id);
    t.certificates[c.certificate_id] = std::move(c);
  } else if (type == "child_registered") {
    auto c = e.at("child").get<ChildRecord>();
    t.children[c.child_id] = std::move(c);
  } else if (type == "health_case_recorded") {
    auto c = e.at("case").get<HealthCase>();
    t.health_cases[c.health_case_id] = std::move(c);
  } else if (type == "broadcast_created") {
    auto b = e.at("job").get<BroadcastJob>();
    t.broadcasts[b.job_id] = std::move(b);
  } else if (type == "recipient_updated") {
    auto& job = t.broadcasts.at(e.at("job_id").get<std::string>());
    job.recipients.at(e.at("index").get<std::size_t>()) = e.at("recipient").get<Recipient>();
  } else if (type == "advisory_published") {
    auto a = e.at("advisory").get<Advisory>();
    t.advisories[a.advisory_id] = std::move(a);
  } else if (type == "account_created") {
    auto a = e.at("account").get<UserAccount>();
    t.accounts[a.username] = std::move(a);
  } else {
    throw std::runtime_error("unknown journal event: " + type);
  }
}

Database::Database(Options options) : clock_(std::move(options.clock)) {
  if (options.data_dir) {
    journal_ = std::make_unique<Journal>(*options.data_dir / "journal.log");
    for (const auto& commit : journal_->recovered()) {
      for (const auto& e : commit.at("events")) apply_event(tables_, e);
      ++tables_.commits;
    }
  }
}

void Database::commit(const Batch& batch) {
  if (batch.empty()) return;
  if (fault_hook_) fault_hook_(CommitStage::BeforeJournal);
  json record{{"seq", tables_.commits + 1}, {"events", batch.events()}};
  if (journal_) journal_->append(record);
  if (fault_hook_) fault_hook_(CommitStage::AfterJournal);
  for (const auto& e : batch.events()) apply_event(tables_, e);
  ++tables_.commits;
}

std::string sequence_id(std::string_view prefix, std::size_t n) {
  return fmt::format("{}{:06d}", prefix, n);
}

}  // namespace brgy
