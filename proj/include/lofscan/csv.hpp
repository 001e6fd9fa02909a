#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lofscan::csv {

struct Field {
    std::string text;
    bool quoted = false;
};

// Splits one CSV record into fields. A field wrapped in double quotes may
// contain commas; a doubled quote inside it is a literal quote. Returns false
// when quoting is unbalanced or a closing quote is not followed by a comma or
// end of line.
bool split_record(std::string_view line, std::vector<Field>& out);

// Wraps text in double quotes, doubling any embedded quote.
std::string quote(std::string_view text);

// Shortest decimal form that round-trips the value, locale independent.
// Infinities render as "inf"/"-inf".
std::string format_double(double v);

// Fixed form with up to `decimals` fractional digits, trailing zeros and a
// trailing point removed ("26", "27.1").
std::string format_double_trimmed(double v, int decimals);

}  // namespace lofscan::csv
