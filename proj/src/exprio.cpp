#include "flatstruct/exprio.hpp"

#include <json.hpp>

#include <cctype>
#include <sstream>

namespace flatstruct {

using json = nlohmann::ordered_json;

Rational parse_rational(const std::string& s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw SchemaError("empty rational");
    std::size_t slash = t.find('/');
    auto digits_ok = [](const std::string& x, bool allow_sign) {
        std::size_t i = 0;
        if (allow_sign && !x.empty() && (x[0] == '-' || x[0] == '+')) i = 1;
        if (i >= x.size()) return false;
        for (; i < x.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(x[i]))) return false;
        return true;
    };
    std::string a = t.substr(0, slash);
    std::string b = slash == std::string::npos ? "1" : t.substr(slash + 1);
    if (!digits_ok(a, true) || !digits_ok(b, false)) throw SchemaError("malformed rational '" + s + "'");
    if (a[0] == '+') a = a.substr(1);
    mpz_class num(a), den(b);
    if (den == 0) throw SchemaError("zero denominator in '" + s + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

namespace {

enum class Tok { Int, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && s[i] == '.') throw ParseError(i, "integer literal", ".");
            out.push_back({Tok::Int, s.substr(start, i - start), start});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            out.push_back({Tok::Ident, s.substr(start, i - start), start});
            continue;
        }
        Tok k;
        switch (c) {
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '^': k = Tok::Caret; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            default: throw ParseError(i, "operator, number or variable", std::string(1, c));
        }
        out.push_back({k, std::string(1, c), i});
        ++i;
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

// Precedence climbing over tokens; values are ring elements.
class Parser {
public:
    Parser(const std::string& text, RingPtr ring, std::map<std::string, int> names)
        : toks_(lex(text)), ring_(std::move(ring)), names_(std::move(names)) {}

    Elem run() {
        Elem v = expr(0);
        if (peek().kind != Tok::End) fail("operator or end of input");
        return v;
    }

private:
    static int binary_prec(Tok k) {
        switch (k) {
            case Tok::Plus:
            case Tok::Minus: return 1;
            case Tok::Star:
            case Tok::Slash: return 2;
            default: return -1;
        }
    }

    const Token& peek() const { return toks_[i_]; }
    const Token& next() { return toks_[i_++]; }
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        throw ParseError(t.pos, expected, t.kind == Tok::End ? "<end>" : t.text);
    }

    Elem expr(int min_prec) {
        Elem lhs = unary();
        for (;;) {
            Tok k = peek().kind;
            int p = binary_prec(k);
            if (p < 0 || p < min_prec) break;
            const Token op = next();
            Elem rhs = p == 1 ? expr(p + 1) : unary();
            switch (k) {
                case Tok::Plus: lhs = lhs + rhs; break;
                case Tok::Minus: lhs = lhs - rhs; break;
                case Tok::Star: lhs = lhs * rhs; break;
                default:
                    if (rhs.is_zero()) throw ParseError(op.pos, "nonzero divisor", "0");
                    try {
                        lhs = lhs.divided_by(rhs);
                    } catch (const DivisionNotExact&) {
                        throw ParseError(op.pos + 1, "divisor of the form c*z^a*(d rel/dz)^b", "non-monomial");
                    }
            }
        }
        return lhs;
    }

    Elem unary() {
        if (peek().kind == Tok::Minus) {
            next();
            return -unary();
        }
        if (peek().kind == Tok::Plus) {
            next();
            return unary();
        }
        return power();
    }

    Elem power() {
        Elem base = primary();
        if (peek().kind != Tok::Caret) return base;
        next();
        std::size_t epos = peek().pos;
        if (peek().kind != Tok::Int && peek().kind != Tok::LParen) fail("nonnegative integer exponent");
        Elem e = power();
        if (!e.is_polynomial() || !e.num().is_constant()) throw ParseError(epos, "nonnegative integer exponent", toks_[i_ - 1].text);
        Rational q = e.num().constant_term();
        if (q.get_den() != 1 || q < 0 || q > 100000) throw ParseError(epos, "nonnegative integer exponent", q.get_str());
        return base.pow(static_cast<unsigned>(q.get_num().get_ui()));
    }

    Elem primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Int: {
                next();
                return Elem::constant(ring_, Rational(mpz_class(t.text)));
            }
            case Tok::Ident: {
                auto it = names_.find(t.text);
                if (it == names_.end()) fail("known variable");
                next();
                return Elem::var(ring_, it->second);
            }
            case Tok::LParen: {
                next();
                Elem v = expr(0);
                if (peek().kind != Tok::RParen) fail("')'");
                next();
                return v;
            }
            default: fail("number, variable or '('");
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    RingPtr ring_;
    std::map<std::string, int> names_;
};

std::map<std::string, int> names_for(const Ring& r) {
    std::map<std::string, int> m;
    for (int i = 0; i < r.n(); ++i) m["t" + std::to_string(i + 1)] = i;
    if (r.has_extension()) m[r.gen()] = r.zvar();
    return m;
}

std::string monomial_text(const Monomial& m, const Ring& ring) {
    std::string s;
    // t_1..t_n first, then the generator
    for (int v = 0; v < ring.nvars(); ++v) {
        if (m[v] == 0) continue;
        if (!s.empty()) s += "*";
        s += ring.var_name(v);
        if (m[v] > 1) s += "^" + std::to_string(m[v]);
    }
    return s;
}

}  // namespace

Elem parse_expr(const std::string& text, const RingPtr& ring) {
    return Parser(text, ring, names_for(*ring)).run();
}

Poly parse_free_poly(const std::string& text, int n, const std::string& gen) {
    std::vector<Rational> w(n + 1, Rational(0));
    auto tmp = Ring::plain(w);
    std::map<std::string, int> names;
    for (int i = 0; i < n; ++i) names["t" + std::to_string(i + 1)] = i;
    names[gen] = n;
    Elem e = Parser(text, tmp, names).run();
    Poly out(n + 1);
    for (const auto& [m, c] : e.num().terms()) {
        Monomial d(m.begin(), m.begin() + n + 1);
        out.add_term(d, c);
    }
    return out;
}

std::string serialize_poly(const Poly& p, const Ring& ring) {
    if (p.is_zero()) return "0";
    std::string s;
    bool first = true;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        const auto& [m, c] = *it;
        Rational a = abs(c);
        bool neg = c < 0;
        std::string mono = monomial_text(m, ring);
        std::string term;
        if (mono.empty()) term = a.get_str();
        else if (a == 1) term = mono;
        else term = a.get_str() + "*" + mono;
        if (first) s += neg ? "-" + term : term;
        else s += (neg ? " - " : " + ") + term;
        first = false;
    }
    return s;
}

std::string serialize_expr(const Elem& e) {
    if (!e.ring()) return "0";
    const Ring& r = *e.ring();
    std::string num = serialize_poly(e.num(), r);
    if (e.is_polynomial()) return num;
    std::string den;
    if (e.z_den()) den = r.gen() + (e.z_den() > 1 ? "^" + std::to_string(e.z_den()) : "");
    if (e.r_den()) {
        if (!den.empty()) den += "*";
        den += "(" + serialize_poly(r.rel_z(), r) + ")";
        if (e.r_den() > 1) den += "^" + std::to_string(e.r_den());
    }
    return "(" + num + ")/(" + den + ")";
}

bool weight_differences_nonintegral(const std::vector<Rational>& w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            Rational d = w[i] - w[j];
            if (d.get_den() == 1) return false;
        }
    return true;
}

RingPtr build_ring(const std::vector<std::string>& weights, const std::optional<ExtensionDoc>& ext) {
    std::vector<Rational> w;
    for (const auto& s : weights) w.push_back(parse_rational(s));
    if (!ext) return Ring::plain(std::move(w));
    int n = static_cast<int>(w.size());
    Poly rel;
    try {
        rel = parse_free_poly(ext->relation, n, ext->gen);
    } catch (const ParseError& e) {
        throw SchemaError(std::string("relation: ") + e.what());
    }
    return Ring::extension(std::move(w), ext->gen, parse_rational(ext->weight), rel);
}

PvfDocument pvf_document_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.byte > 0 ? e.byte - 1 : 0, "JSON document", e.what());
    }
    PvfDocument d;
    try {
        if (!j.is_object()) throw SchemaError("document is not an object");
        for (const char* key : {"name", "weights", "g"})
            if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
        d.name = j.at("name").get<std::string>();
        d.weights = j.at("weights").get<std::vector<std::string>>();
        d.g = j.at("g").get<std::vector<std::string>>();
        if (j.contains("extension") && !j["extension"].is_null()) {
            const auto& e = j["extension"];
            ExtensionDoc x;
            x.gen = e.value("gen", std::string("z"));
            x.weight = e.at("weight").get<std::string>();
            x.relation = e.at("relation").get<std::string>();
            d.extension = x;
        }
        if (j.contains("meta") && !j["meta"].is_null())
            d.meta = j["meta"].get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw SchemaError(e.what());
    }
    return d;
}

std::string pvf_document_to_json(const PvfDocument& d) {
    json j;
    j["name"] = d.name;
    j["weights"] = d.weights;
    if (d.extension) {
        json e;
        e["gen"] = d.extension->gen;
        e["weight"] = d.extension->weight;
        e["relation"] = d.extension->relation;
        j["extension"] = e;
    }
    j["g"] = d.g;
    if (!d.meta.empty()) j["meta"] = d.meta;
    return j.dump(2);
}

PotentialVF pvf_from_document(const PvfDocument& d) {
    if (d.weights.empty()) throw SchemaError("no weights");
    if (d.g.size() != d.weights.size())
        throw SchemaError("g has " + std::to_string(d.g.size()) + " entries but there are " +
                          std::to_string(d.weights.size()) + " weights");
    PotentialVF p;
    p.name = d.name;
    p.meta = d.meta;
    p.ring = build_ring(d.weights, d.extension);
    const auto& w = p.ring->weights();
    if (w.back() != 1) throw SchemaError("last weight must be 1");
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (!(w[i] < w[i + 1])) throw SchemaError("weights must be strictly increasing");
    for (const auto& s : d.g) p.g.push_back(parse_expr(s, p.ring));
    return p;
}

PvfDocument pvf_to_document(const PotentialVF& p) {
    PvfDocument d;
    d.name = p.name;
    d.meta = p.meta;
    for (const auto& w : p.ring->weights()) d.weights.push_back(w.get_str());
    if (p.ring->has_extension()) {
        ExtensionDoc x;
        x.gen = p.ring->gen();
        x.weight = p.ring->z_weight().get_str();
        x.relation = serialize_poly(p.ring->relation(), *p.ring);
        d.extension = x;
    }
    for (const auto& g : p.g) d.g.push_back(serialize_expr(g));
    return d;
}

PotentialVF parse_pvf(const std::string& text) { return pvf_from_document(pvf_document_from_json(text)); }

std::string serialize_pvf(const PotentialVF& pvf) { return pvf_document_to_json(pvf_to_document(pvf)); }

std::string serialize_matrix(const ElemMatrix& m) {
    json j = json::array();
    for (const auto& row : m) {
        json r = json::array();
        for (const auto& e : row) r.push_back(serialize_expr(e));
        j.push_back(r);
    }
    return j.dump();
}

ElemMatrix parse_matrix(const std::string& text, const RingPtr& ring) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.byte > 0 ? e.byte - 1 : 0, "JSON matrix", e.what());
    }
    if (!j.is_array()) throw SchemaError("matrix must be an array of rows");
    ElemMatrix m;
    for (const auto& row : j) {
        if (!row.is_array()) throw SchemaError("matrix row must be an array");
        std::vector<Elem> r;
        for (const auto& s : row) r.push_back(parse_expr(s.get<std::string>(), ring));
        if (!m.empty() && r.size() != m[0].size()) throw SchemaError("ragged matrix");
        m.push_back(std::move(r));
    }
    return m;
}

}  // namespace flatstruct
