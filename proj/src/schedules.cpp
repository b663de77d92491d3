#include "seiqr/schedules.hpp"

namespace seiqr {

std::vector<double> DistancingSchedule::breakpoint_offsets() const {
  std::vector<double> out;
  out.reserve(2 * transitions.size());
  for (const auto& tr : transitions) {
    out.push_back(days_between(model_start, tr.plateau_end));
    out.push_back(days_between(model_start, tr.next_start));
  }
  return out;
}

DistancingSchedule DistancingSchedule::bc_2020() {
  DistancingSchedule s;
  s.model_start = parse_date("2020-02-01");
  s.observation_start = parse_date("2020-03-01");
  s.transitions = {
      {parse_date("2020-03-14"), parse_date("2020-03-21")},
      {parse_date("2020-05-18"), parse_date("2020-05-25")},
      {parse_date("2020-06-23"), parse_date("2020-06-30")},
      {parse_date("2020-09-12"), parse_date("2020-09-19")},
      {parse_date("2020-10-12"), parse_date("2020-10-19")},  // Thanksgiving
      {parse_date("2020-11-07"), parse_date("2020-11-14")},
  };
  return s;
}

std::size_t TestingSchedule::segment_of(Date r) const {
  if (segments.empty() || r < segments.front().first) {
    throw OutOfWindowError("date " + format_date(r) + " precedes the observation window");
  }
  for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
    if (r <= segments[k].last) return k;
  }
  return segments.size() - 1;
}

TestingSchedule TestingSchedule::bc_2020() {
  return TestingSchedule{{
      {parse_date("2020-03-01"), parse_date("2020-03-15")},
      {parse_date("2020-03-16"), parse_date("2020-04-08")},
      {parse_date("2020-04-09"), parse_date("2020-04-20")},
      {parse_date("2020-04-21"), parse_date("2020-12-31")},
  }};
}

double testing_fraction(Date r, const PhaseValues& values, const TestingSchedule& sched) {
  return values.psi.at(sched.segment_of(r));
}

std::vector<std::string> validate(const DistancingSchedule& sched) {
  std::vector<std::string> issues;
  if (sched.observation_start < sched.model_start) {
    issues.push_back("observation start " + format_date(sched.observation_start) +
                     " precedes model start " + format_date(sched.model_start));
  }
  Date previous = sched.model_start;
  bool first = true;
  for (std::size_t j = 0; j < sched.transitions.size(); ++j) {
    const auto& tr = sched.transitions[j];
    if (!first && tr.plateau_end <= previous) {
      issues.push_back("non-monotone breakpoints: " + format_date(tr.plateau_end) + " does not follow " +
                       format_date(previous));
    } else if (first && tr.plateau_end < sched.model_start) {
      issues.push_back("non-monotone breakpoints: " + format_date(tr.plateau_end) + " precedes model start");
    }
    if (tr.next_start <= tr.plateau_end) {
      issues.push_back("non-monotone breakpoints: transition " + std::to_string(j + 1) + " window " +
                       format_date(tr.plateau_end) + " .. " + format_date(tr.next_start) +
                       " must span more than 0 days");
    }
    previous = tr.next_start;
    first = false;
  }
  return issues;
}

std::vector<std::string> validate(const TestingSchedule& sched) {
  std::vector<std::string> issues;
  if (sched.segments.empty()) {
    issues.push_back("testing schedule has no segments");
    return issues;
  }
  for (std::size_t k = 0; k < sched.segments.size(); ++k) {
    const auto& seg = sched.segments[k];
    if (seg.last < seg.first) {
      issues.push_back("empty testing segment " + format_date(seg.first) + " .. " + format_date(seg.last));
    }
    if (k > 0) {
      const Date expected = add_days(sched.segments[k - 1].last, 1);
      if (seg.first > expected) {
        issues.push_back("non-contiguous segments: gap between " + format_date(sched.segments[k - 1].last) +
                         " and " + format_date(seg.first));
      } else if (seg.first < expected) {
        issues.push_back("overlapping segments at " + format_date(seg.first));
      }
    }
  }
  return issues;
}

}  // namespace seiqr
