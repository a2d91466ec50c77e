#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rdcircle/errors.hpp"

namespace rdcircle {

/// Expression tree over the variables t, u, p (p stands for u_x) with the
/// bound symbols T (the period) and pi. Immutable; shared subtrees allowed.
class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
    constant,
    var_t,
    var_u,
    var_p,
    add,
    sub,
    mul,
    div,
    pow,
    neg,
    sin_fn,
    cos_fn,
    exp_fn,
    tanh_fn,
};

class Expr {
public:
    ExprKind kind;
    double value = 0.0;  // constant payload
    ExprPtr a, b;        // operands (b unused for unary nodes)

    static ExprPtr make_const(double v);
    static ExprPtr make_var(ExprKind k);
    static ExprPtr make_unary(ExprKind k, ExprPtr x);
    static ExprPtr make_binary(ExprKind k, ExprPtr x, ExprPtr y);
};

enum class DiffVar { u, p };

/// Parses an expression; T and pi are substituted as numeric constants.
/// Throws ParseError with the offending byte offset.
ExprPtr parse_expression(const std::string& source, double period_T);

/// Symbolic derivative with light constant folding. Exponents of '^' must be
/// constant for differentiation.
ExprPtr differentiate(const ExprPtr& e, DiffVar var);

double evaluate(const ExprPtr& e, double t, double u, double p);

std::string to_string(const ExprPtr& e);

/// Structural evenness in p: true when every occurrence of p sits inside an
/// even power (or p is absent). Sound but not complete; always confirmed
/// numerically before use.
bool structurally_even_in_p(const ExprPtr& e);

bool depends_on(const ExprPtr& e, ExprKind var);

/// Rejects explicit t-dependence that is not of the form sin/cos(c*t) with
/// c*T/(2pi) an integer. Throws ParseError on violation.
void check_time_periodicity_structure(const ExprPtr& e, double period_T,
                                      const std::string& source);

/// Flat postfix program for fast repeated evaluation.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const ExprPtr& e);

    double operator()(double t, double u, double p) const;
    bool valid() const { return !ops_.empty(); }

private:
    struct Instr {
        ExprKind op;
        double value;
    };
    std::vector<Instr> ops_;
};

}  // namespace rdcircle
