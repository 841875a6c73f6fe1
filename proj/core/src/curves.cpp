#include "lobq/curves.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lobq {

int BucketSpec::index(double v) const {
    if (n < 1 || !(hi > lo)) throw std::invalid_argument("bad bucket spec");
    if (std::isnan(v) || v < lo || v > hi)
        throw std::out_of_range("bucket value outside [lo, hi]");
    if (v == hi) return n - 1;
    const int b = static_cast<int>(std::floor((v - lo) / width()));
    return b >= n ? n - 1 : b;
}

void CurveAccumulator::add(std::int32_t day, double bucket_value, double sample) {
    const int b = spec_.index(bucket_value);
    auto& row = days_[day];
    if (row.empty()) row.resize(spec_.n);
    Welford& w = row[b];
    ++w.n;
    const double d = sample - w.mean;
    w.mean += d / static_cast<double>(w.n);
    w.m2 += d * (sample - w.mean);
}

BucketedCurve CurveAccumulator::finalize() const {
    BucketedCurve c;
    c.spec = spec_;
    c.mean.assign(spec_.n, std::numeric_limits<double>::quiet_NaN());
    c.std_err.assign(spec_.n, std::numeric_limits<double>::quiet_NaN());
    c.count.assign(spec_.n, 0);
    for (int b = 0; b < spec_.n; ++b) {
        std::int64_t days = 0, total = 0;
        double sum_mean = 0.0, sum_var_of_mean = 0.0;
        for (const auto& [day, row] : days_) {
            if (row.empty() || row[b].n == 0) continue;
            ++days;
            total += row[b].n;
            sum_mean += row[b].mean;
            // single-sample days contribute no variance information
            const double var = row[b].n > 1
                ? row[b].m2 / static_cast<double>(row[b].n - 1) : 0.0;
            sum_var_of_mean += var / static_cast<double>(row[b].n);
        }
        if (days == 0) continue;
        c.count[b] = total;
        c.mean[b] = sum_mean / static_cast<double>(days);
        c.std_err[b] = std::sqrt(sum_var_of_mean) / static_cast<double>(days);
    }
    return c;
}

void write_curve_csv(std::ostream& os, const BucketedCurve& c) {
    os << "bucket_lo,bucket_hi,mean,std_err,count\n";
    char buf[128];
    for (int b = 0; b < c.spec.n; ++b) {
        if (c.count[b] == 0) continue;
        const double lo = c.spec.lo + b * c.spec.width();
        const double hi = b + 1 == c.spec.n ? c.spec.hi : lo + c.spec.width();
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%lld\n", lo, hi,
                      c.mean[b], c.std_err[b], static_cast<long long>(c.count[b]));
        os << buf;
    }
}

BucketedCurve read_curve_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("bucket_lo,", 0) != 0)
        throw std::runtime_error("curve csv: missing header");
    struct Row { double lo, hi, mean, se; long long n; };
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Row r{};
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lld", &r.lo, &r.hi, &r.mean,
                        &r.se, &r.n) != 5)
            throw std::runtime_error("curve csv: malformed row '" + line + "'");
        rows.push_back(r);
    }
    if (rows.empty()) throw std::runtime_error("curve csv: no rows");
    // curves in this project are imbalance-bucketed on [-1, 1]; recover the
    // bucket count from the row width (empty buckets are not written)
    const double w = rows.front().hi - rows.front().lo;
    BucketedCurve c;
    c.spec.lo = -1.0;
    c.spec.hi = 1.0;
    c.spec.n = static_cast<int>(std::llround(2.0 / w));
    if (c.spec.n < 1) throw std::runtime_error("curve csv: inconsistent bucket width");
    c.mean.assign(c.spec.n, std::numeric_limits<double>::quiet_NaN());
    c.std_err.assign(c.spec.n, std::numeric_limits<double>::quiet_NaN());
    c.count.assign(c.spec.n, 0);
    for (const Row& r : rows) {
        const int b = c.spec.index(0.5 * (r.lo + r.hi));
        c.mean[b] = r.mean;
        c.std_err[b] = r.se;
        c.count[b] = r.n;
    }
    return c;
}

}  // namespace lobq
