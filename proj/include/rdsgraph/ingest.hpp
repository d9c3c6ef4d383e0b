#ifndef RDSGRAPH_INGEST_HPP_
#define RDSGRAPH_INGEST_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rdsgraph/graph_core.hpp"

namespace rdsgraph {

/// One row of a recruitment CSV before cleaning.
struct RawRecruitRecord {
  std::string subject_id;
  std::string recruiter_id;  // empty for a seed
  double interview_time = 0.0;  // days
  int reported_degree = 0;
  int coupons_issued = 0;
  std::string coupon_id_redeemed;
};

/// Removes weekends and listed breaks from the time axis, so that an interval
/// spanning a removed stretch is shortened by its length. Times are days since
/// 1970-01-01 (a Thursday), which is what ISO timestamps parse to.
struct CalendarMask {
  bool skip_weekends = false;
  std::vector<std::pair<double, double>> breaks;  // [start, end) in days

  bool empty() const { return !skip_weekends && breaks.empty(); }
  double apply(double t) const;
};

struct CleaningReport {
  std::size_t degree_floor = 0;       // degrees raised to the minimum degree
  std::size_t tie_jitter = 0;         // records moved earlier to break a tie
  std::size_t duplicated_coupon = 0;  // recruiters whose coupons_issued was raised
  std::size_t excess_redemptions = 0; // recruits beyond the issued count, summed
  std::vector<std::string> notes;

  std::size_t total() const { return degree_floor + tie_jitter + duplicated_coupon; }
};

struct IngestResult {
  ObservedData observed;
  CleaningReport report;
};

/// "2021-03-04", "2021-03-04T10:30", "2021-03-04 10:30:15" or a plain real.
/// Returns days (since 1970-01-01 for timestamps).
double parse_time(const std::string& text);

std::vector<RawRecruitRecord> read_recruitment_csv(std::istream& in);

/// Degree floor, tie jitter and coupon repair, in that order, then validation.
/// Records stay in file order; a recruiter must appear before its recruits.
IngestResult clean_records(std::vector<RawRecruitRecord> records, const CalendarMask& mask = {});

IngestResult ingest_recruitment_csv(std::istream& in, const CalendarMask& mask = {});
IngestResult ingest_recruitment_csv(const std::filesystem::path& path, const CalendarMask& mask = {});

/// Writes observed data in the recruitment CSV layout; times are written with
/// round-trip precision so re-ingesting makes no repairs.
void write_recruitment_csv(const ObservedData& obs, std::ostream& out);

}  // namespace rdsgraph

#endif  // RDSGRAPH_INGEST_HPP_
