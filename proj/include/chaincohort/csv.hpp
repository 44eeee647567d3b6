#ifndef CHAINCOHORT_CSV_HPP
#define CHAINCOHORT_CSV_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace chaincohort {

/// Floating-point CSV fields carry 12 significant digits so re-runs diff
/// clean.
inline std::string fmt_g12(double v) {
    if (v == 0.0) v = 0.0;  // fold negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Write-temp-then-rename so concurrent report jobs never expose partial
/// files.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace chaincohort

#endif  // CHAINCOHORT_CSV_HPP
