#include "rdsgraph/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace rdsgraph {

namespace {

constexpr double kMinJitter = 1e-6;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Comma split with double-quoted fields ("" escapes a quote).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(trim(field));
  return out;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

int parse_int(const std::string& text, const char* field, std::size_t line) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::runtime_error(fmt::format("line {}: {} '{}' is not an integer", line, field, text));
  }
  return v;
}

// Weekend days in [0, t) with day 0 a Thursday (weekend is offsets [2, 4)).
double weekend_before(double t) {
  const double weeks = std::floor(t / 7.0);
  const double r = t - 7.0 * weeks;
  return 2.0 * weeks + std::clamp(r, 2.0, 4.0) - 2.0;
}

}  // namespace

double CalendarMask::apply(double t) const {
  double removed = skip_weekends ? weekend_before(t) : 0.0;
  for (const auto& [s, e] : breaks) {
    const double c = std::clamp(t, s, e);
    double overlap = c - s;
    if (skip_weekends) overlap -= weekend_before(c) - weekend_before(s);
    removed += overlap;
  }
  return t - removed;
}

double parse_time(const std::string& text) {
  const std::string s = trim(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 0;
  int used = 0;
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-' &&
      std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &used) == 3 && used == 10) {
    if (s.size() > 10) {
      int more = 0;
      const int got = std::sscanf(s.c_str() + 10, "%c%2d:%2d%n", &sep, &h, &mi, &more);
      if (got != 3 || (sep != 'T' && sep != ' ')) throw std::runtime_error(fmt::format("bad timestamp '{}'", s));
      std::size_t pos = 10 + static_cast<std::size_t>(more);
      if (pos < s.size() && s[pos] == ':') {
        std::size_t consumed = 0;
        sec = std::stod(s.substr(pos + 1), &consumed);
        pos += 1 + consumed;
      }
      if (pos < s.size() && s[pos] == 'Z') ++pos;
      if (pos != s.size()) throw std::runtime_error(fmt::format("bad timestamp '{}'", s));
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0) {
      throw std::runtime_error(fmt::format("bad timestamp '{}'", s));
    }
    const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return static_cast<double>(days) + (h * 3600.0 + mi * 60.0 + sec) / 86400.0;
  }
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed == 0 || consumed != s.size() || !std::isfinite(v)) {
    throw std::runtime_error(fmt::format("bad time '{}'", s));
  }
  return v;
}

std::vector<RawRecruitRecord> read_recruitment_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw std::runtime_error("recruitment CSV is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  for (const char* required : {"subject_id", "recruiter_id", "interview_time", "reported_degree", "coupons_issued"}) {
    if (!col.count(required)) throw std::runtime_error(fmt::format("missing column '{}'", required));
  }
  const auto redeemed = col.find("coupon_id_redeemed");

  std::vector<RawRecruitRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw std::runtime_error(fmt::format("line {}: expected {} fields, found {}", line_no, header.size(), f.size()));
    }
    RawRecruitRecord r;
    r.subject_id = f[col["subject_id"]];
    r.recruiter_id = f[col["recruiter_id"]];
    try {
      r.interview_time = parse_time(f[col["interview_time"]]);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(fmt::format("line {}: {}", line_no, e.what()));
    }
    r.reported_degree = parse_int(f[col["reported_degree"]], "reported_degree", line_no);
    r.coupons_issued = parse_int(f[col["coupons_issued"]], "coupons_issued", line_no);
    if (redeemed != col.end()) r.coupon_id_redeemed = f[redeemed->second];
    if (r.subject_id.empty()) throw std::runtime_error(fmt::format("line {}: empty subject_id", line_no));
    out.push_back(std::move(r));
  }
  return out;
}

IngestResult clean_records(std::vector<RawRecruitRecord> records, const CalendarMask& mask) {
  const std::size_t n = records.size();
  CleaningReport report;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> recruiter(n, kNoRecruiter);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = records[k];
    if (!index.emplace(r.subject_id, k).second) {
      throw std::runtime_error(fmt::format("duplicate subject_id '{}'", r.subject_id));
    }
    if (r.recruiter_id.empty()) continue;
    const auto it = index.find(r.recruiter_id);
    if (it == index.end() || it->second == k) {
      throw std::runtime_error(fmt::format("subject '{}' names recruiter '{}', which is missing or not earlier",
                                           r.subject_id, r.recruiter_id));
    }
    recruiter[k] = it->second;
  }
  RecruitmentGraph g(recruiter);

  std::vector<int> degrees(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int floor = static_cast<int>(g.min_degree(k));
    degrees[k] = records[k].reported_degree;
    if (degrees[k] < floor) {
      report.notes.push_back(fmt::format("degree of '{}' raised from {} to {}", records[k].subject_id,
                                         degrees[k], floor));
      degrees[k] = floor;
      ++report.degree_floor;
    }
  }

  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) {
    times[k] = mask.empty() ? records[k].interview_time : mask.apply(records[k].interview_time);
  }

  // Spread each run of equal times that would leave a recruit tied with an
  // earlier record: members move earlier by up to epsilon, the last stays.
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < n; ++k) {
    const double gap = times[k] - times[k - 1];
    if (gap > 0.0) min_gap = std::min(min_gap, gap);
  }
  const double eps = std::isfinite(min_gap) ? std::max(0.5 * min_gap, kMinJitter) : kMinJitter;
  for (std::size_t b = 0; b < n;) {
    std::size_t e = b + 1;
    while (e < n && times[e] == times[b]) ++e;
    bool needs = false;
    for (std::size_t k = b + 1; k < e; ++k) needs = needs || !g.is_seed(k);
    if (needs) {
      const std::size_t m = e - b;
      for (std::size_t k = b; k + 1 < e; ++k) {
        times[k] -= eps * static_cast<double>(e - 1 - k) / static_cast<double>(m - 1);
        report.notes.push_back(fmt::format("time of '{}' moved earlier by {:g}", records[k].subject_id, times[e - 1] - times[k]));
        ++report.tie_jitter;
      }
    }
    b = e;
  }

  std::vector<int> issued(n);
  for (std::size_t k = 0; k < n; ++k) {
    issued[k] = records[k].coupons_issued;
    const int recruits = static_cast<int>(g.out_degree(k));
    if (recruits > issued[k]) {
      report.notes.push_back(fmt::format("coupons of '{}' raised from {} to {}", records[k].subject_id,
                                         issued[k], recruits));
      report.excess_redemptions += static_cast<std::size_t>(recruits - std::max(issued[k], 0));
      issued[k] = recruits;
      ++report.duplicated_coupon;
    }
  }

  std::vector<std::string> ids(n);
  for (std::size_t k = 0; k < n; ++k) ids[k] = records[k].subject_id;
  return {make_observed(std::move(g), std::move(degrees), std::move(times), std::move(issued), std::move(ids)),
          std::move(report)};
}

IngestResult ingest_recruitment_csv(std::istream& in, const CalendarMask& mask) {
  return clean_records(read_recruitment_csv(in), mask);
}

IngestResult ingest_recruitment_csv(const std::filesystem::path& path, const CalendarMask& mask) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  return ingest_recruitment_csv(in, mask);
}

void write_recruitment_csv(const ObservedData& obs, std::ostream& out) {
  out << "subject_id,recruiter_id,interview_time,reported_degree,coupons_issued,coupon_id_redeemed\n";
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const std::size_t r = obs.graph.recruiter(k);
    out << fmt::format("{},{},{:.17g},{},{},\n", quote(obs.ids[k]), r == kNoRecruiter ? "" : quote(obs.ids[r]),
                       obs.times[k], obs.degrees[k], obs.coupons_issued[k]);
  }
}

}  // namespace rdsgraph
