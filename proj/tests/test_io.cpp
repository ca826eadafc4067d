#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hsn/io.hpp"
#include "hsn/random.hpp"

using namespace hsn;

namespace {

int error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("edge lists map string ids to dense vertices") {
  std::istringstream in("a,b\nb,c\nc,a\n");
  const GraphInput g = read_edge_list(in);
  CHECK(g.graph.size() == 3);
  CHECK(g.graph.edge_count() == 3);
  CHECK(g.ids == std::vector<std::string>{"a", "b", "c"});

  std::istringstream weighted("src,dst,weight\n# comment\n\na,b,2.5\n");
  const GraphInput w = read_edge_list(weighted);
  CHECK(w.graph.size() == 2);
  CHECK(w.graph.weight(0, 1) == 2.5);

  std::istringstream bad("a,b\na,b,x\n");
  CHECK(error_line([&] { read_edge_list(bad); }) == 2);
  std::istringstream loop("a,a\n");
  CHECK(error_line([&] { read_edge_list(loop); }) == 1);
}

TEST_CASE("attribute tables") {
  std::istringstream in("id,hemisphere,region,x,y,z\nv1,L,r1,0,1,2\nv2,R,r1,0.5,1,2\n");
  const AttributeTable t = read_attributes(in);
  CHECK(t.size() == 2);
  CHECK(t.has_xyz());
  CHECK(t.xyz(1, 0) == 0.5);
  CHECK(t.hemisphere == std::vector<std::string>{"L", "R"});

  std::istringstream missing("id,region\nv1,r1\n,r2\n");
  CHECK(error_line([&] { read_attributes(missing); }) == 3);
  std::istringstream duplicate("id\nv1\nv1\n");
  CHECK(error_line([&] { read_attributes(duplicate); }) == 3);
  std::istringstream partial("id,x,y\nv1,0,0\n");
  CHECK_THROWS_AS(read_attributes(partial), DataError);
  std::istringstream noid("name\nv1\n");
  CHECK_THROWS_AS(read_attributes(noid), DataError);

  std::istringstream only_id("id\nv1\nv2\nv3\n");
  const AttributeTable ids = read_attributes(only_id);
  std::istringstream edges("v3,v1\n");
  const GraphInput g = read_edge_list(edges, &ids);
  CHECK(g.graph.size() == 3);
  CHECK(g.graph.weight(0, 2) == 1.0);
  std::istringstream dangling("v1,v9\n");
  CHECK(error_line([&] { read_edge_list(dangling, &ids); }) == 1);
}

TEST_CASE("hierarchy files round trip") {
  const HierarchicalFunction h({{0, 0, 0, 1, 1}, {0, 0, 1, 2, 3}});
  std::ostringstream out;
  write_hierarchy(out, h);
  std::istringstream in(out.str());
  CHECK(read_hierarchy(in, 5).raw() == h.raw());

  const std::vector<std::string> ids{"e", "d", "c", "b", "a"};
  std::ostringstream named;
  write_hierarchy(named, h, &ids);
  std::unordered_map<std::string, int> index_of;
  for (int i = 0; i < 5; ++i) index_of[ids[static_cast<std::size_t>(i)]] = i;
  std::istringstream named_in(named.str());
  CHECK(read_hierarchy(named_in, 5, &index_of).raw() == h.raw());

  std::istringstream incomplete("0,1\n1,1\n");
  CHECK_THROWS_AS(read_hierarchy(incomplete, 3), DataError);
  std::istringstream zero_block("0,0\n1,1\n");
  CHECK_THROWS_AS(read_hierarchy(zero_block, 2), DataError);
}

TEST_CASE("model specs round trip through json") {
  const nlohmann::json spec = nlohmann::json::parse(R"({
    "n": 12, "lambda": [[0, 0.1], [0.1, 0]], "sizes": [6, 6],
    "children": [{"lambda": [[0.5]], "sizes": [6]},
                 {"lambda": [[0.4, 0.1], [0.1, 0.4]], "pi": [0.5, 0.5]}]})");
  const HsbmParams p = hsbm_from_json(spec);
  CHECK(p.children.size() == 2);
  CHECK(p.children[1].n == 6);
  const HsbmParams back = hsbm_from_json(hsbm_to_json(p));
  CHECK(back.lambda == p.lambda);
  CHECK(back.children[1].lambda == p.children[1].lambda);
  Rng a(1), b(1);
  CHECK(sample_hsbm(p, a).graph.dense() == sample_hsbm(back, b).graph.dense());
  CHECK_THROWS_AS(hsbm_from_json(nlohmann::json::parse(R"({"n": 3, "lambda": [[0.1]], "bogus": 1})")), ConfigError);

  SimModelSpec sim = SimModelSpec::reduced();
  CHECK(sim_spec_to_json(sim_spec_from_json(sim_spec_to_json(sim))) == sim_spec_to_json(sim));
  CHECK_THROWS_AS(sim_spec_from_json(nlohmann::json::parse(R"({"blockz": 3})")), ConfigError);
}

TEST_CASE("files on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "hsn_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "edges.csv") << "x,y,1\ny,z,3\n";
    std::ofstream(dir / "attrs.csv") << "id,region\nx,1\ny,1\nz,2\n";
    std::ofstream(dir / "config.json") << "{\n  // comment\n  \"a\": 1\n}\n";
  }
  const GraphInput g = ingest(dir / "edges.csv", dir / "attrs.csv");
  CHECK(g.graph.weight(1, 2) == 3.0);
  CHECK(g.attributes->region == std::vector<std::string>{"1", "1", "2"});
  CHECK(read_json_file(dir / "config.json").at("a") == 1);
  CHECK_THROWS(ingest(dir / "absent.csv", std::nullopt));
  std::filesystem::remove_all(dir);
  CHECK(split_csv_line(" a , b,,c ") == std::vector<std::string>{"a", "b", "", "c"});
}
