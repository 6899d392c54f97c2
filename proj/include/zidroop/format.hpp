#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace zidroop {

inline constexpr int kSignificantDigits = 12;

/// Fixed 12-significant-digit rendering used by every CSV/JSON writer.
inline std::string fmt_num(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (v == 0.0) {
        v = 0.0;  // drop the sign of -0
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, v);
    return buf;
}

/// `v` rounded to 12 significant digits, for JSON emission.
inline double round_sig(double v)
{
    if (!std::isfinite(v) || v == 0.0) {
        return v == 0.0 ? 0.0 : v;
    }
    return std::strtod(fmt_num(v).c_str(), nullptr);
}

}  // namespace zidroop
