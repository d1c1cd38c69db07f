#include "ompcore/schedule.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace ompcore {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::static_: return "static";
    case ScheduleKind::dynamic: return "dynamic";
    case ScheduleKind::guided: return "guided";
    case ScheduleKind::auto_: return "auto";
    case ScheduleKind::runtime: return "runtime";
  }
  return "?";
}

std::optional<ScheduleKind> schedule_kind_from_string(std::string_view text) {
  for (auto kind : {ScheduleKind::static_, ScheduleKind::dynamic, ScheduleKind::guided, ScheduleKind::auto_,
                    ScheduleKind::runtime}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::optional<ScheduleSpec> parse_schedule_spec(std::string_view text) {
  std::string_view kind_text = text;
  std::optional<std::string_view> chunk_text;
  if (auto comma = text.find(','); comma != std::string_view::npos) {
    kind_text = text.substr(0, comma);
    chunk_text = text.substr(comma + 1);
  }
  std::string lowered(trim(kind_text));
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto kind = schedule_kind_from_string(lowered);
  if (!kind) return std::nullopt;

  ScheduleSpec spec{*kind, std::nullopt};
  if (chunk_text) {
    auto digits = trim(*chunk_text);
    std::int64_t chunk = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), chunk);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || chunk < 1) {
      return std::nullopt;
    }
    spec.chunk = chunk;
  }
  return spec;
}

std::string to_string(const ScheduleSpec& spec) {
  std::string out(to_string(spec.kind));
  if (spec.chunk) out += "," + std::to_string(*spec.chunk);
  return out;
}

}  // namespace ompcore
