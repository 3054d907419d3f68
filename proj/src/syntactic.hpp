#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "text.hpp"

namespace lceval {

// A dependency parse over lowercase tokens. heads are 1-based token
// indices; 0 marks the root. Exactly one root, no cycles.
struct DepParse {
    TokenSeq tokens;
    std::vector<int> heads;
};

// Throws input_error when lengths differ, a head is out of range, the
// root count is not one, or the head graph has a cycle.
void validate_parse(const DepParse& parse, const std::string& where = "parse");

// Multiset of head-word chains of a fixed length. A chain of length u
// walks u tokens along head links; walks never step onto the virtual
// root. Keys join the chain tokens with a single space.
struct HeadChainBag {
    int length = 0;
    std::unordered_map<std::string, int> counts;
};

HeadChainBag head_chains(const DepParse& parse, int u);

// Clipped chain overlap against one reference, normalized by the number
// of candidate chains; max over references.
double hwcm(const DepParse& candidate, const std::vector<DepParse>& references, int u);
double hwcm_single(const DepParse& candidate, const DepParse& reference, int u);

// Sidecar parse file: tab- or space-separated `index token head` lines,
// sentences separated by blank lines, each record contributing the
// candidate parse first and then one parse per reference.
std::vector<DepParse> load_parse_sidecar(const std::string& path);

}  // namespace lceval
