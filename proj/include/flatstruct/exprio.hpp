#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flatstruct/matrix.hpp"
#include "flatstruct/pvf.hpp"
#include "flatstruct/ring.hpp"

namespace flatstruct {

struct ExtensionDoc {
    std::string gen = "z";
    std::string weight;
    std::string relation;
};

struct PvfDocument {
    std::string name;
    std::vector<std::string> weights;
    std::optional<ExtensionDoc> extension;
    std::vector<std::string> g;
    std::map<std::string, std::string> meta;
};

Rational parse_rational(const std::string& s);

// Expression text in the ring's variables (t1..tn and the generator name).
Elem parse_expr(const std::string& text, const RingPtr& ring);
// Expression over t1..tn and gen without reduction (used for relations).
Poly parse_free_poly(const std::string& text, int n, const std::string& gen);

std::string serialize_poly(const Poly& p, const Ring& ring);
std::string serialize_expr(const Elem& e);

RingPtr build_ring(const std::vector<std::string>& weights, const std::optional<ExtensionDoc>& ext);

PvfDocument pvf_document_from_json(const std::string& text);
std::string pvf_document_to_json(const PvfDocument& doc);

PotentialVF pvf_from_document(const PvfDocument& doc);
PvfDocument pvf_to_document(const PotentialVF& pvf);

PotentialVF parse_pvf(const std::string& text);
std::string serialize_pvf(const PotentialVF& pvf);

std::string serialize_matrix(const ElemMatrix& m);
ElemMatrix parse_matrix(const std::string& json_text, const RingPtr& ring);

}  // namespace flatstruct
