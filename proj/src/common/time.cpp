#include "bandx/common/time.hpp"

#include <charconv>
#include <cstdio>

#include "bandx/common/error.hpp"

namespace bandx {
namespace {

std::optional<int> digits(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

std::optional<Date> Date::try_parse(std::string_view s) {
  if (s.size() != 8) return std::nullopt;
  auto y = digits(s.substr(0, 4));
  auto m = digits(s.substr(4, 2));
  auto d = digits(s.substr(6, 2));
  if (!y || !m || !d) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year(*y), std::chrono::month(static_cast<unsigned>(*m)),
                                  std::chrono::day(static_cast<unsigned>(*d))};
  if (!ymd.ok()) return std::nullopt;
  return Date(std::chrono::sys_days(ymd));
}

Date Date::parse(std::string_view s) {
  auto d = try_parse(s);
  if (!d) throw Error(ErrorCode::SyntaxError, "bad date '" + std::string(s) + "', expected YYYYMMDD");
  return *d;
}

std::string Date::str() const {
  std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02u%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

Date date_of(SimTime t) {
  auto secs = std::chrono::sys_seconds(std::chrono::seconds(t.seconds));
  return Date(std::chrono::floor<std::chrono::days>(secs));
}

SimTime start_of(Date d) {
  return SimTime{std::chrono::duration_cast<std::chrono::seconds>(d.days().time_since_epoch()).count()};
}

std::optional<SimTime> try_parse_time(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t n = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec == std::errc() && p == text.data() + text.size()) return SimTime{n};

  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != 'Z')
    return std::nullopt;
  std::string ymd = std::string(text.substr(0, 4)) + std::string(text.substr(5, 2)) + std::string(text.substr(8, 2));
  auto date = Date::try_parse(ymd);
  auto hh = digits(text.substr(11, 2));
  auto mm = digits(text.substr(14, 2));
  auto ss = digits(text.substr(17, 2));
  if (!date || !hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 59) return std::nullopt;
  return start_of(*date).plus(*hh * 3600 + *mm * 60 + *ss);
}

std::string format_time(SimTime t) {
  Date d = date_of(t);
  std::int64_t rem = t.seconds - start_of(d).seconds;
  std::string ymd = d.str();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%s-%sT%02d:%02d:%02dZ", ymd.substr(0, 4).c_str(), ymd.substr(4, 2).c_str(),
                ymd.substr(6, 2).c_str(), static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

}  // namespace bandx
