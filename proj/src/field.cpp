#include "koszul/field.hpp"

namespace koszul {

namespace {

bool is_prime(long p) {
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

}  // namespace

Field Field::prime(long p) {
    if (!is_prime(p)) throw std::invalid_argument("Field::prime: " + std::to_string(p) + " is not prime");
    return Field{Kind::Prime, p};
}

std::string Field::describe() const {
    return kind == Kind::Rationals ? "Q" : ("F_" + std::to_string(p));
}

Scalar::Scalar(Field f, const mpq_class& v) : field_(f), v_(v) { canonicalize(); }

Scalar::Scalar(Field f, long v) : field_(f), v_(v) { canonicalize(); }

void Scalar::canonicalize() {
    v_.canonicalize();
    if (field_.kind == Field::Kind::Prime) {
        if (v_.get_den() != 1) {
            // reduce a rational literal mod p via modular inverse of the denominator
            mpz_class num = v_.get_num(), den = v_.get_den(), pz(field_.p), inv;
            if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), pz.get_mpz_t()) == 0)
                throw std::domain_error("Scalar: denominator not invertible mod p");
            v_ = mpq_class(num * inv);
        }
        mpz_class r;
        mpz_mod(r.get_mpz_t(), v_.get_num().get_mpz_t(), mpz_class(field_.p).get_mpz_t());
        v_ = mpq_class(r);
    }
}

Scalar Scalar::operator+(const Scalar& o) const {
    if (field_ != o.field_) throw std::invalid_argument("Scalar: field mismatch");
    return Scalar(field_, mpq_class(v_ + o.v_));
}

Scalar Scalar::operator-(const Scalar& o) const {
    if (field_ != o.field_) throw std::invalid_argument("Scalar: field mismatch");
    return Scalar(field_, mpq_class(v_ - o.v_));
}

Scalar Scalar::operator*(const Scalar& o) const {
    if (field_ != o.field_) throw std::invalid_argument("Scalar: field mismatch");
    return Scalar(field_, mpq_class(v_ * o.v_));
}

Scalar Scalar::operator/(const Scalar& o) const { return *this * o.inverse(); }

Scalar Scalar::operator-() const { return Scalar(field_, mpq_class(-v_)); }

Scalar Scalar::inverse() const {
    if (is_zero()) throw std::domain_error("Scalar: division by zero");
    if (field_.kind == Field::Kind::Rationals) return Scalar(field_, mpq_class(1 / v_));
    mpz_class inv, pz(field_.p);
    if (mpz_invert(inv.get_mpz_t(), v_.get_num().get_mpz_t(), pz.get_mpz_t()) == 0)
        throw std::domain_error("Scalar: not invertible mod p");
    return Scalar(field_, mpq_class(inv));
}

}  // namespace koszul
