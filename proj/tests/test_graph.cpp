#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <zlib.h>

#include "rdf2vec/graph.hpp"
#include "rdf2vec/random.hpp"
#include "support/fixtures.hpp"

using namespace rdf2vec;
using rdf2vec::testing::entity;
using rdf2vec::testing::predicate;

TEST(ParseNTriples, SingleTriple) {
    auto g = parse_ntriples("<http://ex/Hamburg> <http://ex/country> <http://ex/Germany> .");
    EXPECT_EQ(g.entity_count(), 2u);
    EXPECT_EQ(g.predicate_count(), 1u);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.triple_count(), 1u);
}

TEST(ParseNTriples, ExampleGraph) {
    auto g = rdf2vec::testing::example_graph();
    EXPECT_EQ(g.entity_count(), 4u);
    EXPECT_EQ(g.predicate_count(), 4u);
    EXPECT_EQ(g.edge_count(), 5u);
    EXPECT_EQ(g.out_edges(entity(g, "Hamburg")).size(), 2u);
}

TEST(ParseNTriples, MissingDotReportsLine) {
    std::string text =
        "# header\n"
        "<http://ex/x> <http://ex/p> <http://ex/y> .\n"
        "<http://ex/a> <http://ex/p> <http://ex/b>\n";
    try {
        parse_ntriples(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ParseNTriples, UnbalancedBrackets) {
    EXPECT_THROW(parse_ntriples("<http://ex/a <http://ex/p> <http://ex/b> ."), ParseError);
    EXPECT_THROW(parse_ntriples("<http://ex/a> <http://ex/p> <http://ex/b ."), ParseError);
    EXPECT_THROW(parse_ntriples("<http://ex/a> http://ex/p> <http://ex/b> ."), ParseError);
}

TEST(ParseNTriples, LiteralCountedNotLinked) {
    auto g = parse_ntriples(
        "<http://ex/Hamburg> <http://ex/name> \"Hamburg\" .\n"
        "<http://ex/Hamburg> <http://ex/label> \"Hamburg\"@de .\n"
        "<http://ex/Hamburg> <http://ex/pop> \"1800000\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
        "<http://ex/Hamburg> <http://ex/note> \"a \\\"quoted\\\" . value\" .\n");
    EXPECT_EQ(g.triple_count(), 4u);
    EXPECT_EQ(g.literal_triple_count(), 4u);
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_EQ(g.entity_count(), 1u);
}

TEST(ParseNTriples, EmptyAndCommentsOnly) {
    auto g = parse_ntriples("");
    EXPECT_EQ(g.entity_count(), 0u);
    auto h = parse_ntriples("# nothing\n\n   \n");
    EXPECT_EQ(h.triple_count(), 0u);
}

TEST(ParseNTriples, BlankNodesAreEntities) {
    auto g = parse_ntriples("_:b0 <http://ex/p> <http://ex/x> .\n<http://ex/x> <http://ex/q> _:b0 .\n");
    ASSERT_TRUE(g.find_entity("_:b0"));
    EXPECT_EQ(g.out_edges(*g.find_entity("_:b0")).size(), 1u);
    EXPECT_EQ(g.edge_count(), 2u);
}

TEST(ParseNTriples, LineEndingsAndTrailingWhitespace) {
    std::string crlf;
    for (char c : rdf2vec::testing::kExampleGraph) {
        if (c == '\n') crlf += "  \t\r\n";
        else crlf.push_back(c);
    }
    auto a = rdf2vec::testing::example_graph();
    auto b = parse_ntriples(crlf);
    std::ostringstream sa, sb;
    a.write_ntriples(sa);
    b.write_ntriples(sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(OutEdges, ExampleGraph) {
    auto g = rdf2vec::testing::example_graph();
    std::vector<Edge> hamburg{{predicate(g, "country"), entity(g, "Germany")},
                              {predicate(g, "leader"), entity(g, "Peter_Tschentscher")}};
    EXPECT_EQ(g.out_edges(entity(g, "Hamburg")), hamburg);
    std::vector<Edge> germany{{predicate(g, "leader"), entity(g, "Angela_Merkel")}};
    EXPECT_EQ(g.out_edges(entity(g, "Germany")), germany);
}

TEST(OutEdges, SinkAndInvalid) {
    auto g = parse_ntriples("<http://ex/a> <http://ex/p> <http://ex/b> .");
    EXPECT_TRUE(g.out_edges(*g.find_entity("http://ex/b")).empty());
    EXPECT_THROW(g.out_edges(99), InvalidId);
}

TEST(Interning, Bijection) {
    auto g = rdf2vec::testing::example_graph();
    for (EntityId i = 0; i < g.entity_count(); ++i) EXPECT_EQ(g.find_entity(g.entity(i)), i);
    for (PredicateId i = 0; i < g.predicate_count(); ++i) EXPECT_EQ(g.find_predicate(g.predicate(i)), i);
    // first-appearance order
    EXPECT_EQ(g.entity(0), "http://ex/Hamburg");
    EXPECT_EQ(g.entity(1), "http://ex/Germany");
}

// Random graphs: serialize adjacency -> parse again gives the same ids and edges,
// and edge count = triples - literal triples.
TEST(ParseNTriples, RoundTripProperty) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        std::ostringstream text;
        const bool with_literals = seed % 2 == 1;
        std::size_t nodes = 1 + rng.below(30), edges = rng.below(80), literals = 0;
        for (std::size_t e = 0; e < edges; ++e) {
            text << "<http://ex/n" << rng.below(nodes) << "> <http://ex/p" << rng.below(5) << "> ";
            if (with_literals && rng.below(5) == 0) {
                text << "\"lit\" .\n";
                ++literals;
            } else if (rng.below(7) == 0) {
                text << "_:b" << rng.below(3) << " .\n";
            } else {
                text << "<http://ex/n" << rng.below(nodes) << "> .\n";
            }
        }
        auto g = parse_ntriples(text.str());
        EXPECT_EQ(g.edge_count(), g.triple_count() - g.literal_triple_count());
        EXPECT_EQ(g.literal_triple_count(), literals);

        std::ostringstream once;
        g.write_ntriples(once);
        auto h = parse_ntriples(once.str());
        std::ostringstream twice;
        h.write_ntriples(twice);
        EXPECT_EQ(once.str(), twice.str());
        if (!with_literals) {
            ASSERT_EQ(h.entity_count(), g.entity_count());
            ASSERT_EQ(h.predicate_count(), g.predicate_count());
            for (EntityId i = 0; i < g.entity_count(); ++i) {
                EXPECT_EQ(h.entity(i), g.entity(i));
                EXPECT_EQ(h.out_edges(i), g.out_edges(i));
            }
            for (PredicateId i = 0; i < g.predicate_count(); ++i) EXPECT_EQ(h.predicate(i), g.predicate(i));
        }
    }
}

TEST(LoadGraph, GzipDetectedBySuffix) {
    auto dir = std::filesystem::temp_directory_path() / "rdf2vec_graph_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "g.nt.gz").string();
    gzFile f = gzopen(path.c_str(), "wb");
    ASSERT_TRUE(f);
    const auto& text = rdf2vec::testing::kExampleGraph;
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
    auto g = load_graph(path);
    EXPECT_EQ(g.edge_count(), 5u);
    EXPECT_THROW(load_graph((dir / "missing.nt").string()), std::runtime_error);
    std::filesystem::remove_all(dir);
}
