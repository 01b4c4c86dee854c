#pragma once

// Synthetic statement graphs shared by the test binaries.

#include <string>
#include <vector>

#include "hrlp/kg.hpp"
#include "hrlp/rng.hpp"

namespace testutil {

// Random hyper-relational KG: `n_statements` over `n_entities` entities and
// `n_relations` relations, ~half the statements carrying 1-2 qualifier pairs.
inline hrlp::StatementGraph random_kg(std::size_t n_statements, std::size_t n_entities,
                                      std::size_t n_relations, std::uint64_t seed) {
    hrlp::Rng rng(seed);
    std::vector<hrlp::RawStatement> raw;
    raw.reserve(n_statements);
    auto ent = [&] { return "e" + std::to_string(rng.below(n_entities)); };
    auto rel = [&] { return "p" + std::to_string(rng.below(n_relations)); };
    for (std::size_t i = 0; i < n_statements; ++i) {
        hrlp::RawStatement s;
        s.head = ent();
        s.relation = rel();
        do {
            s.tail = ent();
        } while (s.tail == s.head);
        if (rng.uniform() < 0.5) {
            const auto nq = 1 + rng.below(2);
            for (std::uint64_t q = 0; q < nq; ++q) s.qualifiers.emplace_back(rel(), ent());
        }
        raw.push_back(std::move(s));
    }
    return hrlp::intern(raw);
}

}  // namespace testutil
