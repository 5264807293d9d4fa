#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gflow/errors.hpp"

namespace gflow {

// Closed expression trees over named real variables: constants, variables,
// sums, products, integer powers and exp/sin/cos/log. Immutable, shareable.
// Normalization is limited to constant folding and zero/one elimination;
// equality of expressions is decided pointwise, never structurally.
class ScalarExpr {
public:
    enum class Kind { Constant, Variable, Sum, Product, Power, Func };
    enum class FuncName { Exp, Sin, Cos, Log };

    struct Node {
        Kind kind;
        double value = 0.0;              // Constant
        std::string name;                // Variable
        std::vector<ScalarExpr> args;    // Sum, Product, Func (1 arg), Power (1 arg)
        int exponent = 0;                // Power
        FuncName func = FuncName::Exp;   // Func
    };

    ScalarExpr() : node_(constant_node(0.0)) {}
    /*implicit*/ ScalarExpr(double c) : node_(constant_node(c)) {}
    /*implicit*/ ScalarExpr(int c) : node_(constant_node(c)) {}

    static ScalarExpr constant(double c) { return ScalarExpr(constant_node(c)); }

    static ScalarExpr variable(std::string name) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Variable;
        n->name = std::move(name);
        return ScalarExpr(std::move(n));
    }

    static ScalarExpr sum(std::vector<ScalarExpr> terms) {
        double folded = 0.0;
        std::vector<ScalarExpr> kept;
        for (auto& t : terms) {
            if (t.kind() == Kind::Sum) {
                for (const auto& s : t.node_->args) append_term(kept, folded, s);
            } else {
                append_term(kept, folded, t);
            }
        }
        if (folded != 0.0 || kept.empty()) kept.insert(kept.begin(), constant(folded));
        if (kept.size() == 1) return kept.front();
        auto n = std::make_shared<Node>();
        n->kind = Kind::Sum;
        n->args = std::move(kept);
        return ScalarExpr(std::move(n));
    }

    static ScalarExpr product(std::vector<ScalarExpr> factors) {
        double folded = 1.0;
        std::vector<ScalarExpr> kept;
        for (auto& f : factors) {
            if (f.kind() == Kind::Product) {
                for (const auto& g : f.node_->args) append_factor(kept, folded, g);
            } else {
                append_factor(kept, folded, f);
            }
        }
        if (folded == 0.0) return constant(0.0);
        if (folded != 1.0 || kept.empty()) kept.insert(kept.begin(), constant(folded));
        if (kept.size() == 1) return kept.front();
        auto n = std::make_shared<Node>();
        n->kind = Kind::Product;
        n->args = std::move(kept);
        return ScalarExpr(std::move(n));
    }

    static ScalarExpr power(ScalarExpr base, int exponent) {
        if (exponent == 0) return constant(1.0);
        if (exponent == 1) return base;
        if (base.kind() == Kind::Constant && (base.node_->value != 0.0 || exponent > 0))
            return constant(int_pow(base.node_->value, exponent));
        if (base.kind() == Kind::Power)
            return power(base.node_->args.front(), base.node_->exponent * exponent);
        auto n = std::make_shared<Node>();
        n->kind = Kind::Power;
        n->args = {std::move(base)};
        n->exponent = exponent;
        return ScalarExpr(std::move(n));
    }

    static ScalarExpr apply(FuncName f, ScalarExpr arg) {
        if (arg.kind() == Kind::Constant)
            return constant(eval_func(f, arg.node_->value));
        auto n = std::make_shared<Node>();
        n->kind = Kind::Func;
        n->func = f;
        n->args = {std::move(arg)};
        return ScalarExpr(std::move(n));
    }

    static ScalarExpr exp(ScalarExpr a) { return apply(FuncName::Exp, std::move(a)); }
    static ScalarExpr sin(ScalarExpr a) { return apply(FuncName::Sin, std::move(a)); }
    static ScalarExpr cos(ScalarExpr a) { return apply(FuncName::Cos, std::move(a)); }
    static ScalarExpr log(ScalarExpr a) { return apply(FuncName::Log, std::move(a)); }

    Kind kind() const { return node_->kind; }
    const Node& node() const { return *node_; }

    bool is_constant() const { return node_->kind == Kind::Constant; }
    bool is_zero() const { return is_constant() && node_->value == 0.0; }
    bool is_one() const { return is_constant() && node_->value == 1.0; }
    double constant_value() const { return node_->value; }

    double eval(const std::map<std::string, double>& point) const {
        double v = eval_rec(point);
        if (!std::isfinite(v)) throw DomainError("evaluation produced a non-finite value");
        return v;
    }

    ScalarExpr diff(const std::string& var) const {
        const Node& n = *node_;
        switch (n.kind) {
        case Kind::Constant:
            return constant(0.0);
        case Kind::Variable:
            return constant(n.name == var ? 1.0 : 0.0);
        case Kind::Sum: {
            std::vector<ScalarExpr> parts;
            parts.reserve(n.args.size());
            for (const auto& a : n.args) parts.push_back(a.diff(var));
            return sum(std::move(parts));
        }
        case Kind::Product: {
            std::vector<ScalarExpr> terms;
            terms.reserve(n.args.size());
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                std::vector<ScalarExpr> factors = n.args;
                factors[i] = n.args[i].diff(var);
                terms.push_back(product(std::move(factors)));
            }
            return sum(std::move(terms));
        }
        case Kind::Power: {
            const auto& base = n.args.front();
            return product({constant(n.exponent), power(base, n.exponent - 1),
                            base.diff(var)});
        }
        case Kind::Func: {
            const auto& u = n.args.front();
            ScalarExpr du = u.diff(var);
            switch (n.func) {
            case FuncName::Exp: return product({exp(u), du});
            case FuncName::Sin: return product({cos(u), du});
            case FuncName::Cos: return product({constant(-1.0), sin(u), du});
            case FuncName::Log: return product({power(u, -1), du});
            }
        }
        }
        return {};
    }

    ScalarExpr substitute(const std::map<std::string, ScalarExpr>& repl) const {
        const Node& n = *node_;
        switch (n.kind) {
        case Kind::Constant:
            return *this;
        case Kind::Variable: {
            auto it = repl.find(n.name);
            return it == repl.end() ? *this : it->second;
        }
        case Kind::Sum:
        case Kind::Product: {
            std::vector<ScalarExpr> parts;
            parts.reserve(n.args.size());
            for (const auto& a : n.args) parts.push_back(a.substitute(repl));
            return n.kind == Kind::Sum ? sum(std::move(parts)) : product(std::move(parts));
        }
        case Kind::Power:
            return power(n.args.front().substitute(repl), n.exponent);
        case Kind::Func:
            return apply(n.func, n.args.front().substitute(repl));
        }
        return {};
    }

    void collect_variables(std::set<std::string>& out) const {
        const Node& n = *node_;
        if (n.kind == Kind::Variable) out.insert(n.name);
        for (const auto& a : n.args) a.collect_variables(out);
    }

    std::set<std::string> variables() const {
        std::set<std::string> out;
        collect_variables(out);
        return out;
    }

    std::string str() const {
        std::string out;
        print_rec(out);
        return out;
    }

private:
    explicit ScalarExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static std::shared_ptr<const Node> constant_node(double c) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Constant;
        n->value = c;
        return n;
    }

    static void append_term(std::vector<ScalarExpr>& kept, double& folded,
                            const ScalarExpr& t) {
        if (t.is_constant()) folded += t.node_->value;
        else kept.push_back(t);
    }

    static void append_factor(std::vector<ScalarExpr>& kept, double& folded,
                              const ScalarExpr& f) {
        if (f.is_constant()) folded *= f.node_->value;
        else kept.push_back(f);
    }

    static double int_pow(double base, int e) {
        double r = 1.0, b = base;
        int n = e < 0 ? -e : e;
        for (; n > 0; n >>= 1, b *= b)
            if (n & 1) r *= b;
        return e < 0 ? 1.0 / r : r;
    }

    static double eval_func(FuncName f, double x) {
        switch (f) {
        case FuncName::Exp: return std::exp(x);
        case FuncName::Sin: return std::sin(x);
        case FuncName::Cos: return std::cos(x);
        case FuncName::Log:
            if (x <= 0.0) throw DomainError("log of a non-positive value");
            return std::log(x);
        }
        return 0.0;
    }

    double eval_rec(const std::map<std::string, double>& point) const {
        const Node& n = *node_;
        switch (n.kind) {
        case Kind::Constant:
            return n.value;
        case Kind::Variable: {
            auto it = point.find(n.name);
            if (it == point.end()) throw UnboundVariable(n.name);
            return it->second;
        }
        case Kind::Sum: {
            double s = 0.0;
            for (const auto& a : n.args) s += a.eval_rec(point);
            return s;
        }
        case Kind::Product: {
            double p = 1.0;
            for (const auto& a : n.args) p *= a.eval_rec(point);
            return p;
        }
        case Kind::Power: {
            double b = n.args.front().eval_rec(point);
            if (b == 0.0 && n.exponent < 0)
                throw DomainError("zero raised to a negative power");
            return int_pow(b, n.exponent);
        }
        case Kind::Func:
            return eval_func(n.func, n.args.front().eval_rec(point));
        }
        return 0.0;
    }

    static const char* func_name(FuncName f) {
        switch (f) {
        case FuncName::Exp: return "exp";
        case FuncName::Sin: return "sin";
        case FuncName::Cos: return "cos";
        case FuncName::Log: return "log";
        }
        return "?";
    }

    static std::string format_double(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    void print_rec(std::string& out) const {
        const Node& n = *node_;
        switch (n.kind) {
        case Kind::Constant: {
            if (n.value < 0.0) {
                out += "(" + format_double(n.value) + ")";
            } else {
                out += format_double(n.value);
            }
            break;
        }
        case Kind::Variable:
            out += n.name;
            break;
        case Kind::Sum: {
            bool first = true;
            for (const auto& a : n.args) {
                if (!first) out += " + ";
                first = false;
                a.print_rec(out);
            }
            break;
        }
        case Kind::Product: {
            bool first = true;
            for (const auto& a : n.args) {
                if (!first) out += "*";
                first = false;
                bool parens = a.kind() == Kind::Sum;
                if (parens) out += "(";
                a.print_rec(out);
                if (parens) out += ")";
            }
            break;
        }
        case Kind::Power: {
            const auto& b = n.args.front();
            bool parens = b.kind() == Kind::Sum || b.kind() == Kind::Product ||
                          b.kind() == Kind::Power || b.kind() == Kind::Constant;
            if (parens) out += "(";
            b.print_rec(out);
            if (parens) out += ")";
            out += "^";
            if (n.exponent < 0) {
                out += "(" + std::to_string(n.exponent) + ")";
            } else {
                out += std::to_string(n.exponent);
            }
            break;
        }
        case Kind::Func:
            out += func_name(n.func);
            out += "(";
            n.args.front().print_rec(out);
            out += ")";
            break;
        }
    }

    std::shared_ptr<const Node> node_;
};

inline ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr::sum({a, b});
}
inline ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr::product({a, b});
}
inline ScalarExpr operator-(const ScalarExpr& a) {
    return ScalarExpr::product({ScalarExpr(-1.0), a});
}
inline ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr::sum({a, -b});
}
inline ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr::product({a, ScalarExpr::power(b, -1)});
}

// Recursive-descent parser for the expression grammar: identifiers, decimal
// literals, + - * / ^, parentheses and name(expr) calls. '^' binds tighter
// than '*' and '/', which bind tighter than '+' and '-'. Exponents are
// integer literals.
class ExprParser {
public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    ScalarExpr parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("empty expression", pos_);
        ScalarExpr e = parse_sum();
        skip_ws();
        if (pos_ < text_.size())
            throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    ScalarExpr parse_sum() {
        ScalarExpr e = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+')) e = e + parse_term();
            else if (consume('-')) e = e - parse_term();
            else return e;
        }
    }

    ScalarExpr parse_term() {
        ScalarExpr e = parse_factor();
        for (;;) {
            skip_ws();
            if (consume('*')) e = e * parse_factor();
            else if (consume('/')) e = e / parse_factor();
            else return e;
        }
    }

    ScalarExpr parse_factor() {
        skip_ws();
        if (consume('-')) return -parse_factor();
        if (consume('+')) return parse_factor();
        ScalarExpr base = parse_atom();
        skip_ws();
        if (consume('^')) return ScalarExpr::power(base, parse_int_exponent());
        return base;
    }

    int parse_int_exponent() {
        skip_ws();
        bool parens = consume('(');
        skip_ws();
        bool neg = consume('-');
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ == start) throw SyntaxError("expected integer exponent", pos_);
        int value = std::stoi(std::string(text_.substr(start, pos_ - start)));
        if (parens) {
            skip_ws();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
        }
        return neg ? -value : value;
    }

    ScalarExpr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (consume('(')) {
            ScalarExpr e = parse_sum();
            skip_ws();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string name = parse_identifier();
            skip_ws();
            if (consume('(')) {
                ScalarExpr arg = parse_sum();
                skip_ws();
                if (!consume(')')) throw SyntaxError("expected ')'", pos_);
                if (name == "exp") return ScalarExpr::exp(arg);
                if (name == "sin") return ScalarExpr::sin(arg);
                if (name == "cos") return ScalarExpr::cos(arg);
                if (name == "log") return ScalarExpr::log(arg);
                throw SyntaxError("unknown function '" + name +
                                      "' (available: exp, sin, cos, log)",
                                  pos_);
            }
            return ScalarExpr::variable(name);
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    ScalarExpr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark; // 'e' begins an identifier, not an exponent
            }
        }
        try {
            return ScalarExpr::constant(std::stod(std::string(text_.substr(start, pos_ - start))));
        } catch (const std::exception&) {
            throw SyntaxError("malformed number", start);
        }
    }

    std::string parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline ScalarExpr parse_expr(std::string_view text) { return ExprParser(text).parse(); }

} // namespace gflow
