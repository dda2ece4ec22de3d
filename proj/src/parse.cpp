#include "cforge/parse.hpp"

#include <cctype>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

class Parser {
public:
    Parser(std::string_view text, const VarTable& table) : text_(text), table_(table) {}

    Expr run() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError(pos_, "empty expression");
        Expr e = sum();
        skip_space();
        if (pos_ != text_.size()) throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'");
        return e;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr sum() {
        Expr e = product();
        while (true) {
            if (accept('+'))
                e = e + product();
            else if (accept('-'))
                e = e - product();
            else
                return e;
        }
    }

    Expr product() {
        Expr e = unary();
        while (true) {
            if (accept('*')) {
                e = e * unary();
            } else if (accept('/')) {
                std::size_t at = pos_;
                Expr d = unary();
                if (d.is_zero()) throw ParseError(at, "division by zero");
                if (!is_unit(d, table_)) throw ParseError(at, "division by an expression that is not an invertible monomial");
                e = e * d.inverse_monomial();
            } else {
                return e;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        std::size_t base_at = pos_;
        Expr base = primary();
        if (!accept('^')) return base;
        std::size_t at = pos_;
        Expr ex = unary();
        auto r = ex.as_number();
        if (!r) throw ParseError(at, "exponent must be a rational constant");
        return raise(base, *r, base_at);
    }

    Expr raise(const Expr& base, const Rational& r, std::size_t at) {
        if (r.get_den() == 1) {
            if (!r.get_num().fits_slong_p()) throw ParseError(at, "exponent too large");
            long n = r.get_num().get_si();
            if (n >= 0) return base.pow(static_cast<unsigned>(n));
            if (base.is_zero() || !is_unit(base, table_))
                throw ParseError(at, "negative power of an expression that is not an invertible monomial");
            return base.inverse_monomial().pow(static_cast<unsigned>(-n));
        }
        if (!base.is_monomial() || base.leading().coef != 1)
            throw ParseError(at, "fractional power requires a product of positive parameters");
        for (const auto& f : base.leading().mono.factors())
            if (!table_.is_positive(f.var))
                throw ParseError(at, "fractional power of '" + table_.name(f.var) + "', which is not a positive parameter");
        Exponent e(r.get_num().get_si(), r.get_den().get_si());
        return Expr::term(base.leading().mono.pow(e), Rational(1));
    }

    Expr primary() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError(pos_, "unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = sum();
            if (!accept(')')) throw ParseError(pos_, "expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '.' || std::isalpha(static_cast<unsigned char>(text_[pos_]))))
                throw ParseError(pos_, "malformed number");
            return Expr(Rational(std::string(text_.substr(start, pos_ - start))));
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            auto v = table_.lookup(name);
            if (!v) throw UnknownIdentifier(start, name);
            return Expr::var(*v);
        }
        throw ParseError(pos_, std::string("unexpected '") + c + "'");
    }

    std::string_view text_;
    const VarTable& table_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const VarTable& table) { return Parser(text, table).run(); }

}  // namespace cforge
