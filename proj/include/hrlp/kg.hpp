#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hrlp {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QualifierPair {
    RelationId relation{};
    EntityId entity{};
    auto operator<=>(const QualifierPair&) const = default;
};

// A hyper-relational fact: main triple plus a set of qualifier pairs.
// Qualifiers are kept canonically sorted and deduplicated so statements
// compare and hash as 4-tuples with set-valued qualifiers.
struct Statement {
    EntityId head{};
    RelationId relation{};
    EntityId tail{};
    std::vector<QualifierPair> qualifiers;

    static Statement make(EntityId h, RelationId r, EntityId t,
                          std::vector<QualifierPair> quals);

    auto operator<=>(const Statement&) const = default;
};

class Vocab {
public:
    EntityId intern(const std::string& label) {
        auto it = index_.find(label);
        if (it != index_.end()) return it->second;
        const auto id = static_cast<EntityId>(labels_.size());
        labels_.push_back(label);
        index_.emplace(label, id);
        return id;
    }

    std::optional<std::int32_t> find(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& label(std::int32_t id) const { return labels_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::int32_t> index_;
};

struct AdjacencyRecord {
    EntityId neighbor{};
    RelationId relation{};
    bool outgoing{};  // true when the owning entity is the head
    std::int32_t statement{};
};

// Interned graph. Immutable after construction; safe to share read-only.
struct StatementGraph {
    Vocab entities;
    Vocab relations;
    std::vector<Statement> statements;
    std::vector<std::vector<AdjacencyRecord>> adjacency;  // per entity

    std::size_t num_entities() const { return entities.size(); }
    std::size_t num_relations() const { return relations.size(); }
};

struct RawStatement {
    std::string head, relation, tail;
    std::vector<std::pair<std::string, std::string>> qualifiers;
};

// One statement per line: h,r,t[,qr,qe]*  (WD50K statement convention).
std::vector<RawStatement> parse_statement_file(const std::string& path);
std::vector<RawStatement> parse_statement_lines(const std::string& text, const std::string& origin);

StatementGraph intern(const std::vector<RawStatement>& raw);
// Interns against an existing vocabulary pair (extends them in place).
std::vector<Statement> intern_into(const std::vector<RawStatement>& raw, Vocab& entities,
                                   Vocab& relations);
void rebuild_adjacency(StatementGraph& g);

std::string serialize_statement(const Statement& s, const Vocab& entities, const Vocab& relations);
void write_statement_file(const std::string& path, const std::vector<Statement>& statements,
                          const Vocab& entities, const Vocab& relations);

// index<TAB>label lines.
void write_vocab_file(const std::string& path, const Vocab& v);
Vocab read_vocab_file(const std::string& path);

// Fraction of statements per qualifier-pair count. Fractions sum to 1.
std::map<std::size_t, double> qualifier_ratio(const std::vector<Statement>& statements);
// Q% = share of statements with at least one qualifier pair, in [0, 1].
double qualifier_share(const std::vector<Statement>& statements);

}  // namespace hrlp
