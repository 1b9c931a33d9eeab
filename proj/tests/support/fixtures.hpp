#pragma once

#include <string>

#include "rdf2vec/graph.hpp"

namespace rdf2vec::testing {

// Hamburg / Germany / Angela_Merkel / Peter_Tschentscher excerpt.
inline const std::string kExampleGraph =
    "<http://ex/Hamburg> <http://ex/country> <http://ex/Germany> .\n"
    "<http://ex/Germany> <http://ex/leader> <http://ex/Angela_Merkel> .\n"
    "<http://ex/Angela_Merkel> <http://ex/birthPlace> <http://ex/Hamburg> .\n"
    "<http://ex/Hamburg> <http://ex/leader> <http://ex/Peter_Tschentscher> .\n"
    "<http://ex/Peter_Tschentscher> <http://ex/residence> <http://ex/Hamburg> .\n";

inline KnowledgeGraph example_graph() { return parse_ntriples(kExampleGraph); }

inline EntityId entity(const KnowledgeGraph& g, const std::string& local) {
    return g.find_entity("http://ex/" + local).value();
}

inline PredicateId predicate(const KnowledgeGraph& g, const std::string& local) {
    return g.find_predicate("http://ex/" + local).value();
}

}  // namespace rdf2vec::testing
