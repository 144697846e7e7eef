#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "szegolab/core.hpp"

namespace szegolab {

// Spectral cut-off profile tau supported in [a,b].  The smooth bump and the
// raised cosine are compactly supported continuous weights with 0 <= tau <= 1;
// the unit indicator is a limiting profile admitted only by the integral
// routines (it is not continuous, and its support touches 0).
class CutoffFunction {
  public:
    enum class Family { SmoothBump, RaisedCosine, IndicatorUnit };

    CutoffFunction(Family family, double a, double b) : family_(family), a_(a), b_(b) {
        if (family == Family::IndicatorUnit) {
            a_ = 0.0;
            b_ = 1.0;
            return;
        }
        if (!(0.0 < a && a < b))
            throw std::invalid_argument("CutoffFunction: need 0 < a < b");
    }

    static CutoffFunction smooth_bump(double a, double b) {
        return CutoffFunction(Family::SmoothBump, a, b);
    }
    static CutoffFunction raised_cosine(double a, double b) {
        return CutoffFunction(Family::RaisedCosine, a, b);
    }
    static CutoffFunction indicator_unit() {
        return CutoffFunction(Family::IndicatorUnit, 0.0, 1.0);
    }

    double operator()(double t) const {
        switch (family_) {
            case Family::SmoothBump: {
                if (t <= a_ || t >= b_) return 0.0;
                return std::exp(-1.0 / ((t - a_) * (b_ - t)));
            }
            case Family::RaisedCosine: {
                if (t <= a_ || t >= b_) return 0.0;
                return 0.5 * (1.0 - std::cos(2.0 * kPi * (t - a_) / (b_ - a_)));
            }
            case Family::IndicatorUnit:
                return (t >= 0.0 && t <= 1.0) ? 1.0 : 0.0;
        }
        return 0.0;
    }

    Family family() const { return family_; }
    double support_lo() const { return a_; }
    double support_hi() const { return b_; }
    bool is_indicator() const { return family_ == Family::IndicatorUnit; }

    std::string family_name() const {
        switch (family_) {
            case Family::SmoothBump: return "smooth_bump";
            case Family::RaisedCosine: return "raised_cosine";
            case Family::IndicatorUnit: return "indicator_unit";
        }
        return "?";
    }

  private:
    Family family_;
    double a_, b_;
};

}  // namespace szegolab
