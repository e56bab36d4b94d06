#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "h2blend/network.hpp"
#include "h2blend/problem_file.hpp"
#include "test_support.hpp"

using namespace h2blend;
using namespace h2blend::testing;

namespace {

Junction junction(std::string id, std::optional<double> slack = std::nullopt) {
  return Junction{std::move(id), 1e6, 0.0, 1.0, slack};
}
Pipe pipe(std::string id, std::string from, std::string to) {
  return Pipe{std::move(id), std::move(from), std::move(to), 1000.0, 0.3, 0.0706858, 0.01};
}
GNode ng(std::string id, std::string j) {
  GNode g;
  g.id = std::move(id);
  g.junction = std::move(j);
  g.kind = GNodeKind::NGSupply;
  g.offer_price = 0.1;
  return g;
}
GNode demand(std::string id, std::string j) {
  GNode g;
  g.id = std::move(id);
  g.junction = std::move(j);
  g.kind = GNodeKind::DemandOptimized;
  g.energy_bid_price = 0.02;
  g.g_max = 10.0;
  return g;
}

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const NetworkError& e) {
    return e.code();
  }
  return "none";
}

std::string element_of(auto&& fn) {
  try {
    fn();
  } catch (const NetworkError& e) {
    return e.element();
  }
  return "none";
}

}  // namespace

TEST(Network, SinglePipeComponents) {
  const auto net = single_pipe().network;
  EXPECT_EQ(net.junctions().size(), 3u);
  EXPECT_EQ(net.pipes().size(), 1u);
  EXPECT_EQ(net.compressors().size(), 1u);
  EXPECT_EQ(net.gnodes().size(), 3u);
  EXPECT_TRUE(net.junction("J1").is_slack());
  EXPECT_FALSE(net.junction("J3").is_slack());
  EXPECT_EQ(net.gnode("D1").kind, GNodeKind::DemandOptimized);
}

TEST(Network, EightNodeComponents) {
  const auto net = eight_node().network;
  EXPECT_EQ(net.junctions().size(), 8u);
  EXPECT_EQ(net.compressors().size(), 3u);
  std::set<std::string> at_j1, at_j5;
  for (auto k : net.incidence("J1").gnodes) at_j1.insert(net.gnodes()[k].id);
  for (auto k : net.incidence("J5").gnodes) at_j5.insert(net.gnodes()[k].id);
  EXPECT_EQ(at_j1, (std::set<std::string>{"S1", "S2"}));
  EXPECT_EQ(at_j5, (std::set<std::string>{"D2", "D3"}));
}

TEST(Network, IncidenceOfCompressorOutlet) {
  const auto net = eight_node().network;
  const auto& inc = incidence(net, "J2");
  ASSERT_EQ(inc.incoming.size(), 1u);
  ASSERT_EQ(inc.outgoing.size(), 1u);
  EXPECT_EQ(net.edge_id(inc.incoming[0]), "C1");
  EXPECT_EQ(inc.incoming[0].kind, EdgeKind::Compressor);
  EXPECT_EQ(net.edge_id(inc.outgoing[0]), "P1");
  EXPECT_EQ(inc.outgoing[0].kind, EdgeKind::Pipe);
}

TEST(Network, IncidenceHandshake) {
  for (const auto& spec : {single_pipe(), eight_node()}) {
    const auto& net = spec.network;
    std::size_t in = 0, out = 0, g = 0;
    for (const auto& j : net.junctions()) {
      const auto& inc = net.incidence(j.id);
      in += inc.incoming.size();
      out += inc.outgoing.size();
      g += inc.gnodes.size();
      for (auto e : inc.incoming) EXPECT_EQ(net.edge_to(e), j.id);
      for (auto e : inc.outgoing) EXPECT_EQ(net.edge_from(e), j.id);
    }
    const auto edges = net.pipes().size() + net.compressors().size();
    EXPECT_EQ(in, edges);
    EXPECT_EQ(out, edges);
    EXPECT_EQ(g, net.gnodes().size());
  }
}

TEST(Network, ComponentsSortedById) {
  const auto net = Network::create({junction("B"), junction("A", 3e6)}, {pipe("P", "A", "B")}, {},
                                   {demand("D", "B"), ng("C", "A")});
  EXPECT_EQ(net.junctions()[0].id, "A");
  EXPECT_EQ(net.gnodes()[0].id, "C");
}

TEST(Network, RejectsMissingSlack) {
  EXPECT_EQ(code_of([] { Network::create({junction("A"), junction("B")}, {pipe("P", "A", "B")}, {}, {}); }),
            "validation_error");
}

TEST(Network, RejectsMixedJunction) {
  auto fn = [] {
    Network::create({junction("A", 3e6), junction("B")}, {pipe("P", "A", "B")}, {},
                    {ng("S", "B"), demand("D", "B")});
  };
  EXPECT_EQ(code_of(fn), "validation_error");
}

TEST(Network, RejectsDisconnected) {
  auto fn = [] {
    Network::create({junction("A", 3e6), junction("B"), junction("C"), junction("D")},
                    {pipe("P", "A", "B"), pipe("Q", "C", "D")}, {}, {});
  };
  EXPECT_EQ(code_of(fn), "validation_error");
}

TEST(Network, RejectsUnknownEndpoint) {
  auto fn = [] { Network::create({junction("A", 3e6), junction("B")}, {pipe("P", "A", "Z")}, {}, {}); };
  EXPECT_EQ(code_of(fn), "validation_error");
  EXPECT_EQ(element_of(fn), "P");
}

TEST(Network, RejectsBadGammaBoundsAndDuplicates) {
  auto bad_gamma = [] {
    Junction j = junction("A", 3e6);
    j.gamma_min = 0.5;
    j.gamma_max = 0.2;
    Network::create({j, junction("B")}, {pipe("P", "A", "B")}, {}, {});
  };
  EXPECT_EQ(code_of(bad_gamma), "validation_error");
  auto dup = [] {
    Network::create({junction("A", 3e6), junction("A")}, {}, {}, {});
  };
  EXPECT_EQ(code_of(dup), "validation_error");
}

TEST(Network, RejectsNegativePrice) {
  auto fn = [] {
    GNode s = ng("S", "A");
    s.offer_price = -0.1;
    Network::create({junction("A", 3e6), junction("B")}, {pipe("P", "A", "B")}, {}, {s});
  };
  EXPECT_EQ(code_of(fn), "validation_error");
  EXPECT_EQ(element_of(fn), "S");
}

TEST(Network, UnknownLookupThrows) {
  const auto net = single_pipe().network;
  EXPECT_EQ(code_of([&] { net.junction("nope"); }), "unknown_id");
  EXPECT_FALSE(net.has_gnode("nope"));
}

TEST(Network, WithGnodeRevalidates) {
  const auto net = single_pipe().network;
  GNode d = net.gnode("D1");
  d.g_max = 50.0;
  const auto edited = net.with_gnode(d);
  EXPECT_DOUBLE_EQ(*edited.gnode("D1").g_max, 50.0);
  EXPECT_DOUBLE_EQ(*net.gnode("D1").g_max, 140.0);
  d.junction = "J1";
  EXPECT_EQ(code_of([&] { net.with_gnode(d); }), "validation_error");
}

TEST(ProblemFile, RoundTripIsExact) {
  for (const auto& spec : {single_pipe(), eight_node()}) {
    const auto again = parse_problem(to_json(spec));
    EXPECT_TRUE(again.network == spec.network);
    EXPECT_TRUE(again.gas == spec.gas);
    EXPECT_TRUE(again.scaling == spec.scaling);
    EXPECT_TRUE(again.options == spec.options);
    EXPECT_EQ(to_json(again), to_json(spec));
  }
}

TEST(ProblemFile, DefaultPipeAreaFromDiameter) {
  const auto net = single_pipe().network;
  EXPECT_NEAR(net.pipes()[0].area, M_PI * 0.01 / 4.0, 1e-15);
}

TEST(ProblemFile, ParseErrors) {
  EXPECT_EQ(code_of([] { parse_problem("{ not json"); }), "parse_error");
  EXPECT_EQ(code_of([] { parse_problem(R"({"format_version": 99, "junctions": []})"); }), "parse_error");
  const std::string base = to_json(single_pipe());
  std::string unknown_key = base;
  unknown_key.insert(unknown_key.find('{') + 1, "\"bogus\": 1,");
  EXPECT_EQ(code_of([&] { parse_problem(unknown_key); }), "parse_error");
  std::string bad_kind = base;
  const auto at = bad_kind.find("demand_optimized");
  bad_kind.replace(at, 16, "demand_sometimes");
  EXPECT_EQ(code_of([&] { parse_problem(bad_kind); }), "parse_error");
}

TEST(ProblemFile, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_problem("/nonexistent/net.json"); }), "io_error");
}
