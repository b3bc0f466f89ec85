#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace koszul {

/// Ground field of a computation: the rationals or a prime field F_p.
struct Field {
    enum class Kind { Rationals, Prime };

    Kind kind = Kind::Rationals;
    long p = 0;  // only meaningful for Kind::Prime

    static Field rationals() { return Field{Kind::Rationals, 0}; }
    static Field prime(long p);

    bool operator==(const Field&) const = default;

    std::string describe() const;
};

/// Exact field element. Arithmetic never rounds; division by zero throws.
class Scalar {
public:
    Scalar() = default;
    explicit Scalar(Field f) : field_(f) {}
    Scalar(Field f, const mpq_class& v);
    Scalar(Field f, long v);

    static Scalar zero(Field f) { return Scalar(f); }
    static Scalar one(Field f) { return Scalar(f, 1); }

    const Field& field() const { return field_; }
    const mpq_class& value() const { return v_; }
    bool is_zero() const { return v_ == 0; }
    bool is_one() const { return v_ == 1; }

    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    Scalar operator/(const Scalar& o) const;
    Scalar operator-() const;
    Scalar inverse() const;

    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

    bool operator==(const Scalar& o) const { return field_ == o.field_ && v_ == o.v_; }
    bool operator!=(const Scalar& o) const { return !(*this == o); }

    /// |numerator| — used as the pivot tie-break heuristic over the rationals.
    mpz_class numerator_magnitude() const { return abs(v_.get_num()); }

    std::string str() const { return v_.get_str(); }

private:
    void canonicalize();

    Field field_ = Field::rationals();
    mpq_class v_ = 0;
};

}  // namespace koszul
