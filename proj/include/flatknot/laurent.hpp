#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

namespace flatknot {

// Integer-coefficient Laurent polynomial in one variable A.
// Exact arithmetic; zero coefficients are never stored.
class LaurentPoly {
  public:
    LaurentPoly() = default;
    static LaurentPoly monomial(int exp, std::int64_t coef) {
        LaurentPoly p;
        if (coef != 0) p.c_[exp] = coef;
        return p;
    }
    static LaurentPoly one() { return monomial(0, 1); }

    bool is_zero() const { return c_.empty(); }
    std::int64_t coef(int exp) const {
        auto it = c_.find(exp);
        return it == c_.end() ? 0 : it->second;
    }
    const std::map<int, std::int64_t>& coeffs() const { return c_; }

    LaurentPoly& operator+=(const LaurentPoly& o) {
        for (auto [e, v] : o.c_) {
            auto it = c_.find(e);
            if (it == c_.end()) {
                c_[e] = v;
            } else if ((it->second += v) == 0) {
                c_.erase(it);
            }
        }
        return *this;
    }
    LaurentPoly operator+(const LaurentPoly& o) const { LaurentPoly r = *this; r += o; return r; }
    LaurentPoly operator-() const {
        LaurentPoly r = *this;
        for (auto& [e, v] : r.c_) v = -v;
        return r;
    }
    LaurentPoly operator-(const LaurentPoly& o) const { return *this + (-o); }
    LaurentPoly operator*(const LaurentPoly& o) const {
        LaurentPoly r;
        for (auto [e1, v1] : c_)
            for (auto [e2, v2] : o.c_) {
                auto it = r.c_.find(e1 + e2);
                if (it == r.c_.end()) {
                    if (v1 * v2 != 0) r.c_[e1 + e2] = v1 * v2;
                } else if ((it->second += v1 * v2) == 0) {
                    r.c_.erase(it);
                }
            }
        return r;
    }
    bool operator==(const LaurentPoly& o) const { return c_ == o.c_; }
    bool operator!=(const LaurentPoly& o) const { return !(*this == o); }

    // Substitutes A -> A^-1.
    LaurentPoly mirrored() const {
        LaurentPoly r;
        for (auto [e, v] : c_) r.c_[-e] = v;
        return r;
    }

    // Human-readable, e.g. "-A^3 + 2 - A^-2" (descending exponents).
    std::string str() const {
        if (c_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            auto [e, v] = *it;
            if (!first) os << (v < 0 ? " - " : " + ");
            else if (v < 0) os << "-";
            first = false;
            std::int64_t a = v < 0 ? -v : v;
            if (a != 1 || e == 0) os << a;
            if (e != 0) {
                os << "A";
                if (e != 1) os << "^" << e;
            }
        }
        return os.str();
    }

  private:
    std::map<int, std::int64_t> c_;
};

}  // namespace flatknot
