#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ompcore {

enum class ScheduleKind { static_, dynamic, guided, auto_, runtime };

/// Loop scheduling policy plus an optional chunk size (always >= 1 when set).
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::static_;
  std::optional<std::int64_t> chunk;

  bool operator==(const ScheduleSpec&) const = default;
};

std::string_view to_string(ScheduleKind kind);
std::optional<ScheduleKind> schedule_kind_from_string(std::string_view text);

/// Parses "kind[,chunk]" as used by OMP_SCHEDULE and the bench CLI.
/// Kind matching is case-insensitive and surrounding blanks are ignored.
std::optional<ScheduleSpec> parse_schedule_spec(std::string_view text);

std::string to_string(const ScheduleSpec& spec);

}  // namespace ompcore
