#include "dwrlab/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace dwrlab {

struct Expression::Node {
    enum class Kind { Constant, VarX, VarT, Neg, Add, Sub, Mul, Div, Pow, Call };
    Kind kind;
    double value = 0.0;            // Constant
    std::string fn;                // Call: sin cos exp abs
    std::shared_ptr<const Node> a; // operand / lhs
    std::shared_ptr<const Node> b; // rhs
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

double eval_node(const Expression::Node& n, double x, double t) {
    switch (n.kind) {
        case Kind::Constant: return n.value;
        case Kind::VarX: return x;
        case Kind::VarT: return t;
        case Kind::Neg: return -eval_node(*n.a, x, t);
        case Kind::Add: return eval_node(*n.a, x, t) + eval_node(*n.b, x, t);
        case Kind::Sub: return eval_node(*n.a, x, t) - eval_node(*n.b, x, t);
        case Kind::Mul: return eval_node(*n.a, x, t) * eval_node(*n.b, x, t);
        case Kind::Div: return eval_node(*n.a, x, t) / eval_node(*n.b, x, t);
        case Kind::Pow: return std::pow(eval_node(*n.a, x, t), eval_node(*n.b, x, t));
        case Kind::Call: {
            const double v = eval_node(*n.a, x, t);
            if (n.fn == "sin") return std::sin(v);
            if (n.fn == "cos") return std::cos(v);
            if (n.fn == "exp") return std::exp(v);
            return std::abs(v); // abs
        }
    }
    return 0.0;
}

bool node_uses_time(const Expression::Node& n) {
    if (n.kind == Kind::VarT) return true;
    if (n.a && node_uses_time(*n.a)) return true;
    if (n.b && node_uses_time(*n.b)) return true;
    return false;
}

void print_node(const Expression::Node& n, std::ostream& os) {
    switch (n.kind) {
        case Kind::Constant: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n.value;
            os << tmp.str();
            break;
        }
        case Kind::VarX: os << "x"; break;
        case Kind::VarT: os << "t"; break;
        case Kind::Neg:
            os << "(-";
            print_node(*n.a, os);
            os << ")";
            break;
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div:
        case Kind::Pow: {
            const char* op = n.kind == Kind::Add   ? "+"
                             : n.kind == Kind::Sub ? "-"
                             : n.kind == Kind::Mul ? "*"
                             : n.kind == Kind::Div ? "/"
                                                   : "^";
            os << "(";
            print_node(*n.a, os);
            os << op;
            print_node(*n.b, os);
            os << ")";
            break;
        }
        case Kind::Call:
            os << n.fn << "(";
            print_node(*n.a, os);
            os << ")";
            break;
    }
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    NodePtr parse() {
        NodePtr e = parse_sum();
        skip_space();
        if (pos_ != text_.size())
            fail("end of input or operator");
        return e;
    }

private:
    // positions are 1-based in messages and in SyntaxError::position()
    [[noreturn]] void fail(const std::string& expected) {
        throw SyntaxError("syntax error at position " + std::to_string(pos_ + 1) +
                              ": expected " + expected,
                          pos_ + 1);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr e = parse_product();
        while (true) {
            if (eat('+'))
                e = make(Kind::Add, e, parse_product());
            else if (eat('-'))
                e = make(Kind::Sub, e, parse_product());
            else
                return e;
        }
    }

    NodePtr parse_product() {
        NodePtr e = parse_unary();
        while (true) {
            if (eat('*'))
                e = make(Kind::Mul, e, parse_unary());
            else if (eat('/'))
                e = make(Kind::Div, e, parse_unary());
            else
                return e;
        }
    }

    NodePtr parse_unary() {
        if (eat('-'))
            return make(Kind::Neg, parse_unary());
        return parse_power();
    }

    // right-associative; the exponent admits a leading unary minus
    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (eat('^'))
            return make(Kind::Pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= text_.size())
            fail("a number, variable, function, or '('");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_sum();
            if (!eat(')'))
                fail("')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        fail("a number, variable, function, or '('");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t epos = pos_ + 1;
            if (epos < text_.size() && (text_[epos] == '+' || text_[epos] == '-')) ++epos;
            if (epos < text_.size() && std::isdigit(static_cast<unsigned char>(text_[epos]))) {
                pos_ = epos;
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        const std::string token = text_.substr(start, pos_ - start);
        try {
            std::size_t used = 0;
            const double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Constant;
            n->value = v;
            return n;
        } catch (const std::exception&) {
            pos_ = start;
            fail("a valid number");
        }
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "x") return make(Kind::VarX);
        if (name == "t") return make(Kind::VarT);
        if (name == "sin" || name == "cos" || name == "exp" || name == "abs") {
            if (!eat('('))
                fail("'(' after function name");
            NodePtr arg = parse_sum();
            if (!eat(')'))
                fail("')'");
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Call;
            n->fn = name;
            n->a = arg;
            return n;
        }
        throw UnknownIdentifier("unknown identifier '" + name + "' at position " +
                                    std::to_string(start + 1),
                                start + 1);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

} // namespace

double Expression::eval(double x, double t) const {
    return root_ ? eval_node(*root_, x, t) : 0.0;
}

bool Expression::uses_time() const { return root_ && node_uses_time(*root_); }

std::string Expression::to_string() const {
    if (!root_) return "0";
    std::ostringstream os;
    print_node(*root_, os);
    return os.str();
}

std::function<double(double, double)> Expression::evaluator() const {
    auto root = root_;
    return [root](double x, double t) { return root ? eval_node(*root, x, t) : 0.0; };
}

Expression parse_expression(const std::string& text) {
    if (text.empty())
        throw SyntaxError("empty expression", 1);
    Parser parser(text);
    Expression e;
    e.root_ = parser.parse();
    return e;
}

} // namespace dwrlab
