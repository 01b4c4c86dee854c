#include "hrlp/kg.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace hrlp {

Statement Statement::make(EntityId h, RelationId r, EntityId t, std::vector<QualifierPair> quals) {
    std::sort(quals.begin(), quals.end());
    quals.erase(std::unique(quals.begin(), quals.end()), quals.end());
    return Statement{h, r, t, std::move(quals)};
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

RawStatement parse_line(const std::string& line, const std::string& origin, std::size_t lineno) {
    const auto fields = split_csv(line);
    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(origin + ":" + std::to_string(lineno) + ": " + what);
    };
    if (fields.size() < 3) throw fail("expected at least 3 comma-separated fields");
    if ((fields.size() - 3) % 2 != 0) throw fail("odd number of qualifier fields");
    for (const auto& f : fields) {
        if (f.empty()) throw fail("empty field");
    }
    RawStatement raw;
    raw.head = fields[0];
    raw.relation = fields[1];
    raw.tail = fields[2];
    for (std::size_t i = 3; i + 1 < fields.size(); i += 2) {
        raw.qualifiers.emplace_back(fields[i], fields[i + 1]);
    }
    return raw;
}

}  // namespace

std::vector<RawStatement> parse_statement_lines(const std::string& text, const std::string& origin) {
    std::vector<RawStatement> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        out.push_back(parse_line(line, origin, lineno));
    }
    return out;
}

std::vector<RawStatement> parse_statement_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open statement file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_statement_lines(buf.str(), path);
}

std::vector<Statement> intern_into(const std::vector<RawStatement>& raw, Vocab& entities,
                                   Vocab& relations) {
    std::vector<Statement> out;
    std::set<Statement> seen;
    out.reserve(raw.size());
    for (const auto& rs : raw) {
        const EntityId h = entities.intern(rs.head);
        const RelationId r = relations.intern(rs.relation);
        const EntityId t = entities.intern(rs.tail);
        std::vector<QualifierPair> quals;
        quals.reserve(rs.qualifiers.size());
        for (const auto& [qr, qe] : rs.qualifiers) {
            quals.push_back({relations.intern(qr), entities.intern(qe)});
        }
        Statement s = Statement::make(h, r, t, std::move(quals));
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

void rebuild_adjacency(StatementGraph& g) {
    g.adjacency.assign(g.num_entities(), {});
    for (std::size_t i = 0; i < g.statements.size(); ++i) {
        const auto& s = g.statements[i];
        const auto si = static_cast<std::int32_t>(i);
        g.adjacency[static_cast<std::size_t>(s.head)].push_back({s.tail, s.relation, true, si});
        g.adjacency[static_cast<std::size_t>(s.tail)].push_back({s.head, s.relation, false, si});
    }
}

StatementGraph intern(const std::vector<RawStatement>& raw) {
    StatementGraph g;
    g.statements = intern_into(raw, g.entities, g.relations);
    rebuild_adjacency(g);
    return g;
}

std::string serialize_statement(const Statement& s, const Vocab& entities, const Vocab& relations) {
    std::string line = entities.label(s.head) + "," + relations.label(s.relation) + "," +
                       entities.label(s.tail);
    for (const auto& q : s.qualifiers) {
        line += "," + relations.label(q.relation) + "," + entities.label(q.entity);
    }
    return line;
}

void write_statement_file(const std::string& path, const std::vector<Statement>& statements,
                          const Vocab& entities, const Vocab& relations) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write statement file: " + path);
    for (const auto& s : statements) out << serialize_statement(s, entities, relations) << "\n";
}

void write_vocab_file(const std::string& path, const Vocab& v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write vocab file: " + path);
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << i << "\t" << v.label(static_cast<std::int32_t>(i)) << "\n";
    }
}

Vocab read_vocab_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open vocab file: " + path);
    Vocab v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected index<TAB>label");
        }
        const auto idx = std::stol(line.substr(0, tab));
        std::string label = line.substr(tab + 1);
        if (!label.empty() && label.back() == '\r') label.pop_back();
        const EntityId got = v.intern(label);
        if (got != idx) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": non-contiguous index");
        }
    }
    return v;
}

std::map<std::size_t, double> qualifier_ratio(const std::vector<Statement>& statements) {
    std::map<std::size_t, double> out;
    if (statements.empty()) return out;
    for (const auto& s : statements) out[s.qualifiers.size()] += 1.0;
    for (auto& [k, v] : out) v /= static_cast<double>(statements.size());
    return out;
}

double qualifier_share(const std::vector<Statement>& statements) {
    const auto ratio = qualifier_ratio(statements);
    auto it = ratio.find(0);
    if (statements.empty()) return 0.0;
    return 1.0 - (it == ratio.end() ? 0.0 : it->second);
}

}  // namespace hrlp
