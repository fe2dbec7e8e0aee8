#ifndef DNLS_SUMMATION_HPP
#define DNLS_SUMMATION_HPP

#include <cmath>

namespace dnls {

// Neumaier compensated summation in long double.
class CompensatedSum {
public:
    void add(long double x) noexcept {
        const long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(long double x) noexcept {
        add(x);
        return *this;
    }

    long double value() const noexcept { return sum_ + comp_; }
    explicit operator double() const noexcept { return static_cast<double>(value()); }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

} // namespace dnls

#endif
