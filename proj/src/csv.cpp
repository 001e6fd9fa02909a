#include "lofscan/csv.hpp"

#include <charconv>
#include <cmath>

namespace lofscan::csv {

bool split_record(std::string_view line, std::vector<Field>& out) {
    out.clear();
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (true) {
        Field f;
        if (i < n && line[i] == '"') {
            f.quoted = true;
            ++i;
            bool closed = false;
            while (i < n) {
                if (line[i] == '"') {
                    if (i + 1 < n && line[i + 1] == '"') {
                        f.text += '"';
                        i += 2;
                    } else {
                        ++i;
                        closed = true;
                        break;
                    }
                } else {
                    f.text += line[i++];
                }
            }
            if (!closed) return false;
            if (i < n && line[i] != ',') return false;
        } else {
            while (i < n && line[i] != ',') {
                if (line[i] == '"') return false;
                f.text += line[i++];
            }
        }
        out.push_back(std::move(f));
        if (i >= n) break;
        ++i;  // the comma
        if (i == n) {
            out.push_back({});
            break;
        }
    }
    return true;
}

std::string quote(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 2);
    out += '"';
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

std::string format_double_trimmed(double v, int decimals) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    (void)ec;
    std::string s(buf, end);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

}  // namespace lofscan::csv
