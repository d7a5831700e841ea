#include "brgy/opendata.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "brgy/csv.hpp"

namespace brgy::opendata {

const std::vector<DatasetDescriptor>& list_datasets() {
  static const std::vector<DatasetDescriptor> catalog{
      {"barangay_profile", "Barangay profile", "Registered residents per zone by residency status and gender",
       {"zone_id", "resident_count", "migrant_count", "male_count", "female_count"},
       {"resident_count", "migrant_count", "male_count", "female_count"}},
      {"crime_status", "Crime status", "Blotter cases per month, zone and offense type",
       {"month", "zone_id", "offense_type", "count"},
       {"count"}},
      {"health_status", "Health status", "Recorded health cases per month, zone and condition",
       {"month", "zone_id", "condition", "count"},
       {"count"}},
      {"programs_advisories", "Programs and advisories", "Published government programs and advisories",
       {"published_at", "title", "body"},
       {}},
  };
  return catalog;
}

const DatasetDescriptor& describe(const std::string& dataset_id) {
  for (const auto& d : list_datasets())
    if (d.dataset_id == dataset_id) return d;
  throw Error(ErrorCode::NotFound, "no dataset " + dataset_id, {{"dataset_id", dataset_id}});
}

json to_json(const DatasetDescriptor& d) {
  return json{{"dataset_id", d.dataset_id},
              {"title", d.title},
              {"description", d.description},
              {"columns", d.columns},
              {"count_columns", d.count_columns},
              {"refresh", "on_demand"}};
}

std::string count_cell(std::uint64_t n) { return n < kSuppressBelow ? std::string(kSuppressed) : std::to_string(n); }

std::string_view to_string(PrivateField f) {
  switch (f) {
    case PrivateField::FullName: return "full_name";
    case PrivateField::MobileNumber: return "mobile_number";
    case PrivateField::Address: return "address";
    case PrivateField::ResidentId: return "resident_id";
    case PrivateField::CaseNumber: return "case_number";
  }
  return "full_name";
}

namespace {

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Squeezes whitespace runs so "Juan  Cruz" still matches.
std::string normalize(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

/// `needle` occurs in `hay` delimited by non-alphanumerics.
bool contains_word(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return false;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) {
    bool left = pos == 0 || !is_word(hay[pos - 1]);
    auto end = pos + needle.size();
    bool right = end == hay.size() || !is_word(hay[end]);
    if (left && right) return true;
  }
  return false;
}

std::string digits_of(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isdigit(static_cast<unsigned char>(c))) out += c;
  return out;
}

/// Digit runs where spaces, dots, dashes, slashes and parentheses may sit
/// between digits (how phone numbers get written).
std::vector<std::string> phone_runs(std::string_view s) {
  std::vector<std::string> runs;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) runs.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c)))
      cur += c;
    else if (c == '+' && cur.empty())
      continue;
    else if (std::string_view(" .-()/").find(c) == std::string_view::npos)
      flush();
  }
  flush();
  return runs;
}

/// Maximal digit tokens, for id-like values.
std::vector<std::string> digit_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cur += c;
    } else {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

PrivacyIndex::PrivacyIndex(const Tables& t) {
  for (const auto& [id, r] : t.residents) {
    resident_ids_.insert(id);
    auto first = normalize(r.first_name), last = normalize(r.last_name), middle = normalize(r.middle_name);
    if (!first.empty() && !last.empty()) {
      for (auto form : {first + " " + last, last + ", " + first, last + " " + first, normalize(r.full_name())})
        names_.push_back({form, id});
    }
    if (r.mobile_number) {
      auto d = digits_of(*r.mobile_number);
      if (d.size() >= 7) phones_.emplace_back(d, id);
    }
    auto addr = normalize(r.address);
    if (addr.size() >= 4) addresses_.emplace_back(addr, id);
  }
  for (const auto& [id, c] : t.children) {
    auto first = normalize(c.first_name), last = normalize(c.last_name);
    if (!first.empty() && !last.empty())
      for (auto form : {first + " " + last, last + ", " + first, last + " " + first}) names_.push_back({form, id});
  }
  for (const auto& [n, c] : t.cases) case_numbers_.insert(n);
}

std::vector<Violation> PrivacyIndex::scan_cell(std::string_view cell) const {
  std::vector<Violation> out;
  auto text = normalize(cell);
  for (const auto& n : names_)
    if (contains_word(text, n.form)) out.push_back({0, 0, PrivateField::FullName, n.resident_id});
  auto runs = phone_runs(cell);
  for (const auto& [digits, id] : phones_) {
    auto tail = digits.size() > 10 ? digits.substr(digits.size() - 10) : digits;
    bool hit = std::any_of(runs.begin(), runs.end(), [&](const std::string& run) {
      return run.find(digits) != std::string::npos || run.find(tail) != std::string::npos;
    });
    if (hit) out.push_back({0, 0, PrivateField::MobileNumber, id});
  }
  for (const auto& [addr, id] : addresses_)
    if (text.find(addr) != std::string::npos) out.push_back({0, 0, PrivateField::Address, id});
  for (const auto& tok : digit_tokens(cell)) {
    if (resident_ids_.count(tok)) out.push_back({0, 0, PrivateField::ResidentId, tok});
    if (case_numbers_.count(tok)) out.push_back({0, 0, PrivateField::CaseNumber, tok});
  }
  return out;
}

std::vector<Violation> privacy_scan(std::string_view csv_bytes, const Tables& snapshot) {
  auto rows = csv::parse(csv_bytes);
  PrivacyIndex index(snapshot);
  std::vector<Violation> out;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      for (auto v : index.scan_cell(rows[r][c])) {
        v.row = r;
        v.column = c;
        out.push_back(std::move(v));
      }
  return out;
}

std::string export_csv(const Tables& t, const std::set<int>& zone_ids, const std::string& dataset_id,
                       const DateWindow& window) {
  const auto& d = describe(dataset_id);
  std::string out = csv::format_row(d.columns);
  PrivacyIndex index(t);
  auto label = [&](const std::string& s) { return index.clean(s) ? s : std::string(kRedacted); };

  if (dataset_id == "crime_status" || dataset_id == "health_status") {
    std::map<std::tuple<std::string, int, std::string>, std::uint64_t> counts;
    if (dataset_id == "crime_status") {
      for (const auto& [n, c] : t.cases)
        if (window.contains(c.date_filed)) ++counts[{format_month(c.date_filed), c.zone_id, label(c.offense_type)}];
    } else {
      for (const auto& [id, c] : t.health_cases) {
        auto day = date_of(c.recorded_at);
        if (window.contains(day)) ++counts[{format_month(day), c.zone_id, label(c.condition)}];
      }
    }
    for (const auto& [key, n] : counts)
      out += csv::format_row({std::get<0>(key), std::to_string(std::get<1>(key)), std::get<2>(key), count_cell(n)});
  } else if (dataset_id == "barangay_profile") {
    struct Tally {
      std::uint64_t residents = 0, migrants = 0, male = 0, female = 0;
    };
    std::map<int, Tally> zones;
    for (int z : zone_ids) zones[z];
    for (const auto& [id, r] : t.residents) {
      if (!window.contains(date_of(r.registered_at))) continue;
      auto& z = zones[r.zone_id];
      ++z.residents;
      if (r.residency_status == Residency::Migrant) ++z.migrants;
      ++(r.gender == Gender::Male ? z.male : z.female);
    }
    for (const auto& [zone, z] : zones)
      out += csv::format_row({std::to_string(zone), count_cell(z.residents), count_cell(z.migrants),
                              count_cell(z.male), count_cell(z.female)});
  } else {
    std::vector<const Advisory*> rows;
    for (const auto& [id, a] : t.advisories)
      if (window.contains(date_of(a.published_at))) rows.push_back(&a);
    std::sort(rows.begin(), rows.end(), [](const Advisory* a, const Advisory* b) {
      return std::tie(a->published_at, a->advisory_id) < std::tie(b->published_at, b->advisory_id);
    });
    for (const auto* a : rows) out += csv::format_row({format_timestamp(a->published_at), label(a->title), label(a->body)});
  }
  return out;
}

Advisory publish_advisory(Database& db, const std::string& title, const std::string& body, const Officer& officer) {
  if (officer.role != Role::Secretary && officer.role != Role::Lgu)
    throw Error(ErrorCode::Forbidden, "only the secretary or an LGU may publish advisories");
  if (trim(body).empty()) throw Error(ErrorCode::EmptyBody, "advisory body is empty");
  if (trim(title).empty()) throw Error(ErrorCode::InvalidField, "title: required", {{"field", "title"}});
  return db.write([&](const Tables& t, Batch& batch) {
    Advisory a;
    a.advisory_id = sequence_id("ADV-", t.advisories.size() + 1);
    a.title = trim(title);
    a.body = body;
    a.published_at = db.now();
    a.published_by = officer.username;
    batch.emit("advisory_published", {{"advisory", a}});
    return a;
  });
}

std::vector<Advisory> list_advisories(const Tables& t) {
  std::vector<Advisory> out;
  for (const auto& [id, a] : t.advisories) out.push_back(a);
  std::sort(out.begin(), out.end(), [](const Advisory& a, const Advisory& b) {
    return std::tie(b.published_at, b.advisory_id) < std::tie(a.published_at, a.advisory_id);
  });
  return out;
}

}  // namespace brgy::opendata
