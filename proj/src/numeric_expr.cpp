#include "cforge/numeric_expr.hpp"

#include <cctype>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cforge/errors.hpp"

namespace cforge {

struct NumericExpr::Node {
    enum Kind { Const, Slot, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double value = 0;
    std::size_t slot = 0;
    std::string fn;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(const std::vector<double>& x) const {
        switch (kind) {
            case Const: return value;
            case Slot: return x.at(slot);
            case Neg: return -args[0]->eval(x);
            case Add: return args[0]->eval(x) + args[1]->eval(x);
            case Sub: return args[0]->eval(x) - args[1]->eval(x);
            case Mul: return args[0]->eval(x) * args[1]->eval(x);
            case Div: return args[0]->eval(x) / args[1]->eval(x);
            case Pow: return std::pow(args[0]->eval(x), args[1]->eval(x));
            case Call: {
                double a = args[0]->eval(x);
                if (fn == "sqrt") return std::sqrt(a);
                if (fn == "abs") return std::abs(a);
                if (fn == "sign") return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
                if (fn == "sin") return std::sin(a);
                if (fn == "cos") return std::cos(a);
                if (fn == "atan") return std::atan(a);
                if (fn == "atan2") return std::atan2(a, args[1]->eval(x));
                break;
            }
        }
        throw std::logic_error("bad numeric node");
    }
};

double param_value(const VarTable& table, std::uint32_t index) {
    const auto& p = table.param(index);
    if (!p.value) throw Error("parameter '" + p.name + "' has no numeric value");
    return to_double(*p.value);
}

namespace {

using NodePtr = std::shared_ptr<const NumericExpr::Node>;

NodePtr make(NumericExpr::Node::Kind k, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<NumericExpr::Node>();
    n->kind = k;
    n->args = std::move(args);
    return n;
}

NodePtr constant(double v) {
    auto n = std::make_shared<NumericExpr::Node>();
    n->kind = NumericExpr::Node::Const;
    n->value = v;
    return n;
}

class Parser {
public:
    Parser(const std::string& s, const VarTable& t) : s_(s), t_(t) {}

    NodePtr run() {
        NodePtr e = sum();
        skip();
        if (i_ != s_.size()) throw ParseError(i_, "unexpected character");
        return e;
    }

private:
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    NodePtr sum() {
        NodePtr l = product();
        for (;;) {
            if (eat('+'))
                l = make(NumericExpr::Node::Add, {l, product()});
            else if (eat('-'))
                l = make(NumericExpr::Node::Sub, {l, product()});
            else
                return l;
        }
    }
    NodePtr product() {
        NodePtr l = unary();
        for (;;) {
            if (eat('*'))
                l = make(NumericExpr::Node::Mul, {l, unary()});
            else if (eat('/'))
                l = make(NumericExpr::Node::Div, {l, unary()});
            else
                return l;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(NumericExpr::Node::Neg, {unary()});
        NodePtr base = atom();
        if (eat('^')) return make(NumericExpr::Node::Pow, {base, unary()});
        return base;
    }
    NodePtr atom() {
        skip();
        if (i_ >= s_.size()) throw ParseError(i_, "unexpected end of input");
        char c = s_[i_];
        if (c == '(') {
            ++i_;
            NodePtr e = sum();
            if (!eat(')')) throw ParseError(i_, "expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = i_;
            while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) ++i_;
            return constant(std::stod(s_.substr(start, i_ - start)));
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_]))) ++i_;
            std::string id = s_.substr(start, i_ - start);
            if (eat('(')) return call(id, start);
            auto v = t_.lookup(id);
            if (!v) throw UnknownIdentifier(start, id);
            if (v->kind == VarKind::Parameter) return constant(param_value(t_, v->index));
            if (v->kind != VarKind::Coordinate && v->kind != VarKind::Momentum)
                throw ParseError(start, "'" + id + "' is not a phase-space variable");
            auto n = std::make_shared<NumericExpr::Node>();
            n->kind = NumericExpr::Node::Slot;
            n->slot = state_slot(*v);
            return n;
        }
        throw ParseError(i_, std::string("unexpected character '") + c + "'");
    }
    NodePtr call(const std::string& fn, std::size_t at) {
        static const std::vector<std::string> unary_fns{"sqrt", "abs", "sign", "sin", "cos", "atan"};
        std::vector<NodePtr> args{sum()};
        while (eat(',')) args.push_back(sum());
        if (!eat(')')) throw ParseError(i_, "expected ')'");
        bool known_unary = std::find(unary_fns.begin(), unary_fns.end(), fn) != unary_fns.end();
        if (!(known_unary && args.size() == 1) && !(fn == "atan2" && args.size() == 2))
            throw ParseError(at, "unknown function or wrong arity: " + fn);
        auto n = std::make_shared<NumericExpr::Node>();
        n->kind = NumericExpr::Node::Call;
        n->fn = fn;
        n->args = std::move(args);
        return n;
    }

    const std::string& s_;
    const VarTable& t_;
    std::size_t i_ = 0;
};

}  // namespace

NumericExpr NumericExpr::parse(const std::string& text, const VarTable& table) {
    NumericExpr e;
    e.root_ = Parser(text, table).run();
    return e;
}

double NumericExpr::operator()(const std::vector<double>& state) const {
    if (!root_) throw std::logic_error("empty numeric expression");
    return root_->eval(state);
}

CompiledPoly::CompiledPoly(const Expr& e, const VarTable& table) {
    for (const auto& t : e.terms()) {
        Term nt{to_double(t.coef), {}};
        for (const auto& f : t.mono.factors()) {
            if (f.var.kind == VarKind::Parameter) {
                nt.coef *= std::pow(param_value(table, f.var.index), f.exp.to_double());
            } else if (f.var.kind == VarKind::Coordinate || f.var.kind == VarKind::Momentum) {
                if (!f.exp.is_integer()) throw Error("fractional power of a phase-space variable");
                nt.powers.emplace_back(state_slot(f.var), static_cast<int>(f.exp.num));
            } else {
                throw Error("expression depends on '" + table.name(f.var) + "', not a phase-space function");
            }
        }
        terms_.push_back(std::move(nt));
    }
}

double CompiledPoly::operator()(const std::vector<double>& x) const {
    double sum = 0;
    for (const auto& t : terms_) {
        double v = t.coef;
        for (const auto& [slot, e] : t.powers) {
            double b = x[slot];
            switch (e) {
                case 1: v *= b; break;
                case 2: v *= b * b; break;
                case -1: v /= b; break;
                default: v *= std::pow(b, e);
            }
        }
        sum += v;
    }
    return sum;
}

}  // namespace cforge
