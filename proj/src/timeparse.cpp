#include "commgraph/timeparse.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace commgraph {

namespace {

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool eat(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    /// Exactly `n` digits.
    std::optional<int> digits(std::size_t n) {
        if (pos_ + n > s_.size()) return std::nullopt;
        int v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const char c = s_[pos_ + i];
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            v = v * 10 + (c - '0');
        }
        pos_ += n;
        return v;
    }

    void skipDigits() {
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::optional<Timestamp> parseEpoch(std::string_view s) {
    std::string_view whole = s;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        whole = s.substr(0, dot);
        std::string_view frac = s.substr(dot + 1);
        if (frac.empty()) return std::nullopt;
        for (char c : frac) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        }
    }
    if (whole.empty() || whole == "-" || whole == "+") return std::nullopt;
    if (whole.front() == '+') whole.remove_prefix(1);
    Timestamp v = 0;
    auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), v);
    if (ec != std::errc{} || ptr != whole.data() + whole.size()) return std::nullopt;
    return v;
}

} // namespace

Timestamp makeTimestamp(int year, unsigned month, unsigned day, int hour, int minute, int second) {
    using namespace std::chrono;
    const sys_days d = year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    return d.time_since_epoch().count() * 86400LL + hour * 3600LL + minute * 60LL + second;
}

std::optional<Timestamp> parseTimestamp(std::string_view text) {
    const std::string_view s = trim(text);
    if (s.empty()) return std::nullopt;
    // Bare number (possibly negative): epoch seconds. An ISO date always
    // has '-' at offset 4.
    if (s.size() < 5 || s[4] != '-') return parseEpoch(s);

    Cursor c(s);
    const auto year = c.digits(4);
    if (!year || !c.eat('-')) return std::nullopt;
    const auto month = c.digits(2);
    if (!month || !c.eat('-')) return std::nullopt;
    const auto day = c.digits(2);
    if (!day) return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{*year}, std::chrono::month{static_cast<unsigned>(*month)},
                             std::chrono::day{static_cast<unsigned>(*day)}};
    if (!ymd.ok()) return std::nullopt;

    int hour = 0, minute = 0, second = 0;
    long offsetSeconds = 0;
    if (!c.done()) {
        if (!c.eat('T') && !c.eat(' ')) return std::nullopt;
        const auto hh = c.digits(2);
        if (!hh || !c.eat(':')) return std::nullopt;
        const auto mm = c.digits(2);
        if (!mm) return std::nullopt;
        hour = *hh;
        minute = *mm;
        if (c.eat(':')) {
            const auto ss = c.digits(2);
            if (!ss) return std::nullopt;
            second = *ss;
            if (c.eat('.')) c.skipDigits();  // sub-second precision is truncated
        }
        if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
        if (c.eat('Z')) {
        } else if (c.peek() == '+' || c.peek() == '-') {
            const int sign = c.peek() == '-' ? -1 : 1;
            c.eat(c.peek());
            const auto oh = c.digits(2);
            if (!oh) return std::nullopt;
            c.eat(':');
            const auto om = c.digits(2);
            if (!om) return std::nullopt;
            offsetSeconds = sign * (*oh * 3600L + *om * 60L);
        }
        if (!c.done()) return std::nullopt;
    }
    return makeTimestamp(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day), hour, minute,
                         second) - offsetSeconds;
}

std::string formatTimestamp(Timestamp t) {
    using namespace std::chrono;
    Timestamp days = t / 86400;
    Timestamp rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
    return buf;
}

} // namespace commgraph
