#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

namespace lobq {

struct BucketSpec {
    int n = 20;
    double lo = -1.0;
    double hi = 1.0;

    double width() const { return (hi - lo) / n; }
    // Edge values belong to the right bucket; v == hi maps to the last one.
    int index(double v) const;
    double mid(int b) const { return lo + (b + 0.5) * width(); }
};

// Per-bucket conditional statistics. Samples are grouped by calendar day;
// the bucket mean weights daily means equally and the standard error treats
// the days as independent: se^2 = sum_d var_d / n_d / D^2.
struct BucketedCurve {
    BucketSpec spec;
    std::vector<double> mean;      // NaN for empty buckets
    std::vector<double> std_err;
    std::vector<std::int64_t> count;

    bool empty_bucket(int b) const { return count[b] == 0; }
};

class CurveAccumulator {
  public:
    explicit CurveAccumulator(const BucketSpec& spec) : spec_(spec) {}

    void add(std::int32_t day, double bucket_value, double sample);
    BucketedCurve finalize() const;

  private:
    struct Welford {
        std::int64_t n = 0;
        double mean = 0.0;
        double m2 = 0.0;
    };
    BucketSpec spec_;
    std::map<std::int32_t, std::vector<Welford>> days_;
};

// CSV: "bucket_lo,bucket_hi,mean,std_err,count", one row per non-empty
// bucket, full double precision.
void write_curve_csv(std::ostream& os, const BucketedCurve& c);
BucketedCurve read_curve_csv(std::istream& is);

}  // namespace lobq
