#include "lloom/core/slice_predicate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

#include "lloom/core/util.hpp"

namespace lloom::slice {

namespace {

enum class Tok { Ident, Concept, String, Number, True, False, And, Or, Not, LParen, RParen, Op, End };

struct Token {
    Tok type;
    std::string text;
    std::size_t pos;
};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (c == '(') {
            out.push_back({Tok::LParen, "(", i++});
        } else if (c == ')') {
            out.push_back({Tok::RParen, ")", i++});
        } else if (c == '<' || c == '>' || c == '=' || c == '!') {
            std::string op(1, c);
            if (i + 1 < src.size() && src[i + 1] == '=') op += '=';
            if (op == "=" || op == "!") throw PredicateError("expected comparison operator, found '" + op + "'", i);
            i += op.size();
            out.push_back({Tok::Op, op, start});
        } else if (c == '"' || c == '\'' || c == '`') {
            std::string value;
            ++i;
            while (i < src.size() && src[i] != c) {
                if (src[i] == '\\' && i + 1 < src.size()) ++i;
                value += src[i++];
            }
            if (i >= src.size()) throw PredicateError("unterminated quoted text", start);
            ++i;
            out.push_back({c == '`' ? Tok::Ident : Tok::String, value, start});
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
            ++i;
            while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.' ||
                                      src[i] == 'e' || src[i] == 'E' ||
                                      ((src[i] == '-' || src[i] == '+') && (src[i - 1] == 'e' || src[i - 1] == 'E'))))
                ++i;
            out.push_back({Tok::Number, std::string(src.substr(start, i - start)), start});
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' || src[i] == '.'))
                ++i;
            const std::string word(src.substr(start, i - start));
            const auto lw = lower(word);
            Tok t = Tok::Ident;
            if (lw == "and") t = Tok::And;
            else if (lw == "or") t = Tok::Or;
            else if (lw == "not") t = Tok::Not;
            else if (lw == "true") t = Tok::True;
            else if (lw == "false") t = Tok::False;
            else if (lw == "concept") t = Tok::Concept;
            out.push_back({t, word, start});
        } else {
            throw PredicateError(std::string("unexpected character '") + c + "'", i);
        }
    }
    out.push_back({Tok::End, "", src.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Expr parse_all() {
        auto e = parse_or();
        if (peek().type != Tok::End) throw PredicateError("unexpected '" + peek().text + "'", peek().pos);
        return e;
    }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& next() { return toks_[i_++]; }

    Expr parse_or() {
        auto left = parse_and();
        if (peek().type != Tok::Or) return left;
        Expr e{Expr::Kind::Or, {}, {}};
        e.children.push_back(std::move(left));
        while (peek().type == Tok::Or) {
            next();
            e.children.push_back(parse_and());
        }
        return e;
    }

    Expr parse_and() {
        auto left = parse_unary();
        if (peek().type != Tok::And) return left;
        Expr e{Expr::Kind::And, {}, {}};
        e.children.push_back(std::move(left));
        while (peek().type == Tok::And) {
            next();
            e.children.push_back(parse_unary());
        }
        return e;
    }

    Expr parse_unary() {
        if (peek().type == Tok::Not) {
            next();
            Expr e{Expr::Kind::Not, {}, {}};
            e.children.push_back(parse_unary());
            return e;
        }
        if (peek().type == Tok::LParen) {
            next();
            auto e = parse_or();
            if (peek().type != Tok::RParen) throw PredicateError("expected ')'", peek().pos);
            next();
            return e;
        }
        return parse_comparison();
    }

    Expr parse_comparison() {
        Comparison cmp;
        const auto& head = next();
        cmp.position = head.pos;
        if (head.type == Tok::Concept) {
            if (next().type != Tok::LParen) throw PredicateError("expected '(' after concept", head.pos);
            const auto& name = next();
            if (name.type != Tok::String) throw PredicateError("expected quoted concept name", name.pos);
            if (next().type != Tok::RParen) throw PredicateError("expected ')' after concept name", name.pos);
            cmp.is_concept = true;
            cmp.name = name.text;
        } else if (head.type == Tok::Ident) {
            cmp.name = head.text;
        } else {
            throw PredicateError(head.type == Tok::End ? "unexpected end of predicate"
                                                       : "expected column or concept, found '" + head.text + "'",
                                 head.pos);
        }
        const auto& op = next();
        if (op.type != Tok::Op) throw PredicateError("expected comparison operator", op.pos);
        if (op.text == "<") cmp.op = CmpOp::Lt;
        else if (op.text == "<=") cmp.op = CmpOp::Le;
        else if (op.text == ">") cmp.op = CmpOp::Gt;
        else if (op.text == ">=") cmp.op = CmpOp::Ge;
        else if (op.text == "==") cmp.op = CmpOp::Eq;
        else cmp.op = CmpOp::Ne;
        const auto& lit = next();
        switch (lit.type) {
        case Tok::Number: {
            double v = 0;
            const auto* b = lit.text.data();
            const auto* e = b + lit.text.size();
            auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc{} || p != e) throw PredicateError("malformed number '" + lit.text + "'", lit.pos);
            cmp.literal = v;
            break;
        }
        case Tok::String: cmp.literal = lit.text; break;
        case Tok::True: cmp.literal = true; break;
        case Tok::False: cmp.literal = false; break;
        default: throw PredicateError("expected literal value", lit.pos);
        }
        return Expr{Expr::Kind::Compare, std::move(cmp), {}};
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

std::string suggestions(const std::string& name, const std::vector<std::string>& candidates) {
    std::vector<std::string> near;
    for (const auto& c : candidates) {
        const auto d = edit_distance(lower(name), lower(c));
        if (d <= std::max<std::size_t>(2, name.size() / 4)) near.push_back(c);
    }
    if (!near.empty()) return " (did you mean: " + join(near, ", ") + ")";
    return " (available: " + join(candidates, ", ") + ")";
}

std::optional<std::string> resolve_concept(const Session& s, const std::string& name) {
    for (const auto& c : s.concepts)
        if (c.active && c.name == name) return c.id;
    for (const auto& c : s.concepts)
        if (c.id == name) return c.id;
    return std::nullopt;
}

template <typename T>
bool compare(const T& a, CmpOp op, const T& b) {
    switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    }
    return false;
}

void check_cmp(const Comparison& cmp, const Session& s) {
    if (cmp.is_concept) {
        if (!resolve_concept(s, cmp.name)) {
            std::vector<std::string> names;
            for (const auto* c : s.active_concepts()) names.push_back(c->name);
            throw ValidationError("unknown concept '" + cmp.name + "'" + suggestions(cmp.name, names));
        }
        if (!std::holds_alternative<double>(cmp.literal))
            throw ValidationError("concept(\"" + cmp.name + "\") must be compared with a number");
        return;
    }
    const auto it = s.columns.find(cmp.name);
    if (it == s.columns.end()) {
        std::vector<std::string> names;
        for (const auto& [k, v] : s.columns) names.push_back(k);
        throw ValidationError("unknown column '" + cmp.name + "'" + suggestions(cmp.name, names));
    }
    const bool ok = (it->second == ColumnType::Number && std::holds_alternative<double>(cmp.literal)) ||
                    (it->second == ColumnType::String && std::holds_alternative<std::string>(cmp.literal)) ||
                    (it->second == ColumnType::Boolean && std::holds_alternative<bool>(cmp.literal) &&
                     (cmp.op == CmpOp::Eq || cmp.op == CmpOp::Ne));
    if (!ok)
        throw ValidationError("type mismatch: column '" + cmp.name + "' is " + std::string(to_string(it->second)));
}

bool eval_cmp(const Comparison& cmp, const Session& s, std::size_t doc_index) {
    const auto& doc = s.documents[doc_index];
    if (cmp.is_concept) {
        const auto id = resolve_concept(s, cmp.name);
        const auto* col = id ? s.matrix.column(*id) : nullptr;
        if (!col) return false;
        if (doc_index < col->size() && (*col)[doc_index].doc_id == doc.id)
            return compare((*col)[doc_index].score, cmp.op, std::get<double>(cmp.literal));
        const auto it = std::find_if(col->begin(), col->end(), [&](const ScoreEntry& e) { return e.doc_id == doc.id; });
        if (it == col->end()) return false;
        return compare(it->score, cmp.op, std::get<double>(cmp.literal));
    }
    const auto it = doc.metadata.find(cmp.name);
    if (it == doc.metadata.end() || it->second.index() != cmp.literal.index()) return false;
    return std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            return compare(v, cmp.op, std::get<T>(cmp.literal));
        },
        it->second);
}

bool eval(const Expr& e, const Session& s, std::size_t doc_index) {
    switch (e.kind) {
    case Expr::Kind::Compare: return eval_cmp(e.cmp, s, doc_index);
    case Expr::Kind::Not: return !eval(e.children.front(), s, doc_index);
    case Expr::Kind::And:
        return std::all_of(e.children.begin(), e.children.end(), [&](const Expr& c) { return eval(c, s, doc_index); });
    case Expr::Kind::Or:
        return std::any_of(e.children.begin(), e.children.end(), [&](const Expr& c) { return eval(c, s, doc_index); });
    }
    return false;
}

} // namespace

Expr parse(std::string_view text) {
    if (trim(text).empty()) throw PredicateError("empty predicate", 0);
    return Parser(tokenize(text)).parse_all();
}

void check(const Expr& e, const Session& s) {
    if (e.kind == Expr::Kind::Compare) {
        check_cmp(e.cmp, s);
        return;
    }
    for (const auto& c : e.children) check(c, s);
}

std::vector<std::string> evaluate(const Expr& e, const Session& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.documents.size(); ++i)
        if (eval(e, s, i)) out.push_back(s.documents[i].id);
    return out;
}

std::vector<std::string> slice_documents(const Session& s, const Slice& slice) {
    if (slice.name == "All" && trim(slice.predicate).empty()) {
        std::vector<std::string> all;
        for (const auto& d : s.documents) all.push_back(d.id);
        return all;
    }
    const auto expr = parse(slice.predicate);
    check(expr, s);
    return evaluate(expr, s);
}

} // namespace lloom::slice
