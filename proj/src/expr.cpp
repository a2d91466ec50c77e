#include "rdcircle/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace rdcircle {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTau = 2.0 * kPi;
}

ExprPtr Expr::make_const(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::constant;
    e->value = v;
    return e;
}

ExprPtr Expr::make_var(ExprKind k) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    return e;
}

ExprPtr Expr::make_unary(ExprKind k, ExprPtr x) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(x);
    return e;
}

ExprPtr Expr::make_binary(ExprKind k, ExprPtr x, ExprPtr y) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(x);
    e->b = std::move(y);
    return e;
}

namespace {

bool is_const(const ExprPtr& e, double v) {
    return e->kind == ExprKind::constant && e->value == v;
}

// Smart constructors with constant folding.

ExprPtr fold_unary(ExprKind k, ExprPtr x) {
    if (x->kind == ExprKind::constant) {
        switch (k) {
            case ExprKind::neg: return Expr::make_const(-x->value);
            case ExprKind::sin_fn: return Expr::make_const(std::sin(x->value));
            case ExprKind::cos_fn: return Expr::make_const(std::cos(x->value));
            case ExprKind::exp_fn: return Expr::make_const(std::exp(x->value));
            case ExprKind::tanh_fn: return Expr::make_const(std::tanh(x->value));
            default: break;
        }
    }
    return Expr::make_unary(k, std::move(x));
}

ExprPtr fold_binary(ExprKind k, ExprPtr x, ExprPtr y) {
    if (x->kind == ExprKind::constant && y->kind == ExprKind::constant) {
        switch (k) {
            case ExprKind::add: return Expr::make_const(x->value + y->value);
            case ExprKind::sub: return Expr::make_const(x->value - y->value);
            case ExprKind::mul: return Expr::make_const(x->value * y->value);
            case ExprKind::div: return Expr::make_const(x->value / y->value);
            case ExprKind::pow: return Expr::make_const(std::pow(x->value, y->value));
            default: break;
        }
    }
    switch (k) {
        case ExprKind::add:
            if (is_const(x, 0.0)) return y;
            if (is_const(y, 0.0)) return x;
            break;
        case ExprKind::sub:
            if (is_const(y, 0.0)) return x;
            break;
        case ExprKind::mul:
            if (is_const(x, 0.0) || is_const(y, 0.0)) return Expr::make_const(0.0);
            if (is_const(x, 1.0)) return y;
            if (is_const(y, 1.0)) return x;
            break;
        case ExprKind::div:
            if (is_const(x, 0.0)) return Expr::make_const(0.0);
            if (is_const(y, 1.0)) return x;
            break;
        case ExprKind::pow:
            if (is_const(y, 1.0)) return x;
            if (is_const(y, 0.0)) return Expr::make_const(1.0);
            break;
        default: break;
    }
    return Expr::make_binary(k, std::move(x), std::move(y));
}

class Parser {
public:
    Parser(const std::string& src, double period_T) : src_(src), period_(period_T) {}

    ExprPtr parse() {
        ExprPtr e = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) {
            fail("unexpected trailing input");
        }
        return e;
    }

private:
    const std::string& src_;
    double period_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " at position " + std::to_string(pos_), pos_);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        for (;;) {
            if (consume('+')) {
                e = fold_binary(ExprKind::add, e, parse_term());
            } else if (consume('-')) {
                e = fold_binary(ExprKind::sub, e, parse_term());
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        for (;;) {
            if (consume('*')) {
                e = fold_binary(ExprKind::mul, e, parse_factor());
            } else if (consume('/')) {
                e = fold_binary(ExprKind::div, e, parse_factor());
            } else {
                return e;
            }
        }
    }

    // '^' is right associative; unary minus binds looser than '^'.
    ExprPtr parse_factor() {
        if (consume('-')) {
            return fold_unary(ExprKind::neg, parse_factor());
        }
        ExprPtr base = parse_primary();
        if (consume('^')) {
            return fold_binary(ExprKind::pow, base, parse_factor());
        }
        return base;
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_sum();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return parse_identifier();
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr parse_number() {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return Expr::make_const(v);
    }

    ExprPtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name = src_.substr(start, pos_ - start);
        if (name == "t") return Expr::make_var(ExprKind::var_t);
        if (name == "u") return Expr::make_var(ExprKind::var_u);
        if (name == "p") return Expr::make_var(ExprKind::var_p);
        if (name == "T") return Expr::make_const(period_);
        if (name == "pi") return Expr::make_const(kPi);
        ExprKind fn;
        if (name == "sin") fn = ExprKind::sin_fn;
        else if (name == "cos") fn = ExprKind::cos_fn;
        else if (name == "exp") fn = ExprKind::exp_fn;
        else if (name == "tanh") fn = ExprKind::tanh_fn;
        else {
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        if (!consume('(')) fail("expected '(' after function name");
        ExprPtr arg = parse_sum();
        if (!consume(')')) fail("expected ')'");
        return fold_unary(fn, arg);
    }
};

}  // namespace

ExprPtr parse_expression(const std::string& source, double period_T) {
    return Parser(source, period_T).parse();
}

ExprPtr differentiate(const ExprPtr& e, DiffVar var) {
    const ExprKind target = var == DiffVar::u ? ExprKind::var_u : ExprKind::var_p;
    std::function<ExprPtr(const ExprPtr&)> d = [&](const ExprPtr& x) -> ExprPtr {
        switch (x->kind) {
            case ExprKind::constant:
            case ExprKind::var_t:
                return Expr::make_const(0.0);
            case ExprKind::var_u:
            case ExprKind::var_p:
                return Expr::make_const(x->kind == target ? 1.0 : 0.0);
            case ExprKind::add:
                return fold_binary(ExprKind::add, d(x->a), d(x->b));
            case ExprKind::sub:
                return fold_binary(ExprKind::sub, d(x->a), d(x->b));
            case ExprKind::mul:
                return fold_binary(ExprKind::add,
                                   fold_binary(ExprKind::mul, d(x->a), x->b),
                                   fold_binary(ExprKind::mul, x->a, d(x->b)));
            case ExprKind::div:
                return fold_binary(
                    ExprKind::div,
                    fold_binary(ExprKind::sub,
                                fold_binary(ExprKind::mul, d(x->a), x->b),
                                fold_binary(ExprKind::mul, x->a, d(x->b))),
                    fold_binary(ExprKind::pow, x->b, Expr::make_const(2.0)));
            case ExprKind::pow: {
                if (x->b->kind != ExprKind::constant) {
                    throw PreconditionError(
                        "differentiation requires a constant exponent in '^'");
                }
                const double c = x->b->value;
                return fold_binary(
                    ExprKind::mul, Expr::make_const(c),
                    fold_binary(ExprKind::mul,
                                fold_binary(ExprKind::pow, x->a, Expr::make_const(c - 1.0)),
                                d(x->a)));
            }
            case ExprKind::neg:
                return fold_unary(ExprKind::neg, d(x->a));
            case ExprKind::sin_fn:
                return fold_binary(ExprKind::mul, fold_unary(ExprKind::cos_fn, x->a), d(x->a));
            case ExprKind::cos_fn:
                return fold_unary(ExprKind::neg,
                                  fold_binary(ExprKind::mul,
                                              fold_unary(ExprKind::sin_fn, x->a), d(x->a)));
            case ExprKind::exp_fn:
                return fold_binary(ExprKind::mul, fold_unary(ExprKind::exp_fn, x->a), d(x->a));
            case ExprKind::tanh_fn: {
                ExprPtr th = fold_unary(ExprKind::tanh_fn, x->a);
                ExprPtr sech2 = fold_binary(ExprKind::sub, Expr::make_const(1.0),
                                            fold_binary(ExprKind::mul, th, th));
                return fold_binary(ExprKind::mul, sech2, d(x->a));
            }
        }
        throw Error("unreachable expression kind");
    };
    return d(e);
}

double evaluate(const ExprPtr& e, double t, double u, double p) {
    switch (e->kind) {
        case ExprKind::constant: return e->value;
        case ExprKind::var_t: return t;
        case ExprKind::var_u: return u;
        case ExprKind::var_p: return p;
        case ExprKind::add: return evaluate(e->a, t, u, p) + evaluate(e->b, t, u, p);
        case ExprKind::sub: return evaluate(e->a, t, u, p) - evaluate(e->b, t, u, p);
        case ExprKind::mul: return evaluate(e->a, t, u, p) * evaluate(e->b, t, u, p);
        case ExprKind::div: return evaluate(e->a, t, u, p) / evaluate(e->b, t, u, p);
        case ExprKind::pow: return std::pow(evaluate(e->a, t, u, p), evaluate(e->b, t, u, p));
        case ExprKind::neg: return -evaluate(e->a, t, u, p);
        case ExprKind::sin_fn: return std::sin(evaluate(e->a, t, u, p));
        case ExprKind::cos_fn: return std::cos(evaluate(e->a, t, u, p));
        case ExprKind::exp_fn: return std::exp(evaluate(e->a, t, u, p));
        case ExprKind::tanh_fn: return std::tanh(evaluate(e->a, t, u, p));
    }
    throw Error("unreachable expression kind");
}

std::string to_string(const ExprPtr& e) {
    std::ostringstream os;
    std::function<void(const ExprPtr&)> emit = [&](const ExprPtr& x) {
        switch (x->kind) {
            case ExprKind::constant: os << x->value; return;
            case ExprKind::var_t: os << 't'; return;
            case ExprKind::var_u: os << 'u'; return;
            case ExprKind::var_p: os << 'p'; return;
            case ExprKind::neg: os << "(-"; emit(x->a); os << ')'; return;
            case ExprKind::sin_fn: os << "sin("; emit(x->a); os << ')'; return;
            case ExprKind::cos_fn: os << "cos("; emit(x->a); os << ')'; return;
            case ExprKind::exp_fn: os << "exp("; emit(x->a); os << ')'; return;
            case ExprKind::tanh_fn: os << "tanh("; emit(x->a); os << ')'; return;
            default: break;
        }
        const char* op = x->kind == ExprKind::add   ? "+"
                         : x->kind == ExprKind::sub ? "-"
                         : x->kind == ExprKind::mul ? "*"
                         : x->kind == ExprKind::div ? "/"
                                                    : "^";
        os << '(';
        emit(x->a);
        os << op;
        emit(x->b);
        os << ')';
    };
    emit(e);
    return os.str();
}

bool depends_on(const ExprPtr& e, ExprKind var) {
    if (e->kind == var) return true;
    if (e->a && depends_on(e->a, var)) return true;
    if (e->b && depends_on(e->b, var)) return true;
    return false;
}

namespace {

enum class Parity { independent, even, odd, unknown };

Parity combine_add(Parity x, Parity y) {
    if (x == Parity::independent) return y;
    if (y == Parity::independent) return x;
    if (x == y && x != Parity::unknown) return x;
    return Parity::unknown;
}

Parity combine_mul(Parity x, Parity y) {
    if (x == Parity::independent) return y;
    if (y == Parity::independent) return x;
    if (x == Parity::unknown || y == Parity::unknown) return Parity::unknown;
    return x == y ? Parity::even : Parity::odd;
}

Parity parity_in_p(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::constant:
        case ExprKind::var_t:
        case ExprKind::var_u:
            return Parity::independent;
        case ExprKind::var_p:
            return Parity::odd;
        case ExprKind::add:
        case ExprKind::sub:
            return combine_add(parity_in_p(e->a), parity_in_p(e->b));
        case ExprKind::mul:
        case ExprKind::div:
            return combine_mul(parity_in_p(e->a), parity_in_p(e->b));
        case ExprKind::pow: {
            const Parity base = parity_in_p(e->a);
            if (base == Parity::independent) return Parity::independent;
            if (e->b->kind != ExprKind::constant) return Parity::unknown;
            const double c = e->b->value;
            if (c != std::floor(c)) return Parity::unknown;
            const long long k = static_cast<long long>(c);
            if (base == Parity::even) return Parity::even;
            if (base == Parity::odd) return (k % 2 == 0) ? Parity::even : Parity::odd;
            return Parity::unknown;
        }
        case ExprKind::neg:
            return parity_in_p(e->a);
        case ExprKind::sin_fn:
        case ExprKind::tanh_fn: {
            const Parity a = parity_in_p(e->a);
            if (a == Parity::independent) return Parity::independent;
            if (a == Parity::odd) return Parity::odd;
            return a == Parity::even ? Parity::even : Parity::unknown;
        }
        case ExprKind::cos_fn: {
            const Parity a = parity_in_p(e->a);
            if (a == Parity::independent) return Parity::independent;
            return (a == Parity::odd || a == Parity::even) ? Parity::even : Parity::unknown;
        }
        case ExprKind::exp_fn: {
            const Parity a = parity_in_p(e->a);
            if (a == Parity::independent) return Parity::independent;
            return a == Parity::even ? Parity::even : Parity::unknown;
        }
    }
    return Parity::unknown;
}

}  // namespace

bool structurally_even_in_p(const ExprPtr& e) {
    const Parity par = parity_in_p(e);
    return par == Parity::independent || par == Parity::even;
}

void check_time_periodicity_structure(const ExprPtr& e, double period_T,
                                      const std::string& source) {
    // Every subtree mentioning t must be (inside) a sin/cos whose argument
    // depends on t alone and equals c*t with c*T/(2pi) an integer.
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
        if (!depends_on(x, ExprKind::var_t)) return;
        if (x->kind == ExprKind::sin_fn || x->kind == ExprKind::cos_fn) {
            const ExprPtr& arg = x->a;
            if (depends_on(arg, ExprKind::var_u) || depends_on(arg, ExprKind::var_p)) {
                throw ParseError("time-dependent trig argument mixes state variables: " + source,
                                 0);
            }
            auto at = [&](double tau) { return evaluate(arg, tau, 0.0, 0.0); };
            const double c = at(1.0);
            const double scale = std::max(1.0, std::abs(c));
            const bool linear = std::abs(at(0.0)) <= 1e-9 * scale &&
                                std::abs(at(2.0) - 2.0 * c) <= 1e-9 * scale &&
                                std::abs(at(0.5) - 0.5 * c) <= 1e-9 * scale;
            const double harmonics = c * period_T / kTau;
            const bool integer_harmonic = std::abs(harmonics - std::round(harmonics)) <= 1e-9;
            if (!linear || !integer_harmonic) {
                throw ParseError(
                    "explicit t-dependence must be sin/cos of (2pi/T)*t*integer: " + source, 0);
            }
            return;  // argument certified
        }
        if (x->kind == ExprKind::var_t) {
            throw ParseError("bare t outside sin/cos is not T-periodic: " + source, 0);
        }
        if (x->a) walk(x->a);
        if (x->b) walk(x->b);
    };
    walk(e);
}

CompiledExpr::CompiledExpr(const ExprPtr& e) {
    std::function<void(const ExprPtr&)> flatten = [&](const ExprPtr& x) {
        if (x->a) flatten(x->a);
        if (x->b) flatten(x->b);
        ops_.push_back({x->kind, x->value});
    };
    flatten(e);
}

double CompiledExpr::operator()(double t, double u, double p) const {
    double stack[64];
    int top = -1;
    for (const Instr& in : ops_) {
        switch (in.op) {
            case ExprKind::constant: stack[++top] = in.value; break;
            case ExprKind::var_t: stack[++top] = t; break;
            case ExprKind::var_u: stack[++top] = u; break;
            case ExprKind::var_p: stack[++top] = p; break;
            case ExprKind::add: --top; stack[top] += stack[top + 1]; break;
            case ExprKind::sub: --top; stack[top] -= stack[top + 1]; break;
            case ExprKind::mul: --top; stack[top] *= stack[top + 1]; break;
            case ExprKind::div: --top; stack[top] /= stack[top + 1]; break;
            case ExprKind::pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
            case ExprKind::neg: stack[top] = -stack[top]; break;
            case ExprKind::sin_fn: stack[top] = std::sin(stack[top]); break;
            case ExprKind::cos_fn: stack[top] = std::cos(stack[top]); break;
            case ExprKind::exp_fn: stack[top] = std::exp(stack[top]); break;
            case ExprKind::tanh_fn: stack[top] = std::tanh(stack[top]); break;
        }
    }
    return stack[0];
}

}  // namespace rdcircle
