#include <doctest.h>

#include <fstream>
#include <json.hpp>

#include "editnts/checkpoint.hpp"
#include "editnts/errors.hpp"
#include "fixtures.hpp"
#include "helpers.hpp"

using namespace editnts;
using fixtures::tiny_config;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
}

template <typename Real>
bool same_params(Model<Real>& a, Model<Real>& b) {
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    if (a.params().at(i).value != b.params().at(i).value) return false;
  }
  return true;
}

}  // namespace

TEST_CASE_TEMPLATE("round trip", Real, float, double) {
  testing::TempDir dir("ckpt");
  Model<Real> a(tiny_config(), 1), b(tiny_config(), 2);
  CHECK_FALSE(same_params(a, b));
  save_params(dir / "m.ckpt", a, R"({"epoch": 3})");
  load_params(dir / "m.ckpt", b);
  CHECK(same_params(a, b));
  const auto meta = nlohmann::json::parse(read_checkpoint_meta(dir / "m.ckpt"));
  CHECK(meta.at("epoch") == 3);
  auto c = load_model<Real>(dir / "m.ckpt");
  CHECK(c.config() == a.config());
  CHECK(same_params(a, c));
  CHECK_FALSE(std::filesystem::exists(dir / "m.ckpt.tmp"));
}

TEST_CASE("config json round trip") {
  auto c = tiny_config();
  c.bidirectional = false;
  c.edit_prev_hidden_input = true;
  c.dropout = 0.25;
  CHECK(model_config_from_json(model_config_to_json(c)) == c);
  CHECK_THROWS_AS(model_config_from_json("{}"), CheckpointError);
}

TEST_CASE("damaged files are rejected") {
  testing::TempDir dir("ckpt-bad");
  Model<float> a(tiny_config(), 1);
  save_params(dir / "m.ckpt", a);
  const auto bytes = slurp(dir / "m.ckpt");
  Model<float> b(tiny_config(), 2);

  SUBCASE("truncated") {
    for (std::size_t cut : {std::size_t{4}, std::size_t{30}, bytes.size() / 2, bytes.size() - 1}) {
      spit(dir / "t.ckpt", bytes.substr(0, cut));
      CHECK_THROWS_AS(load_params(dir / "t.ckpt", b), CheckpointError);
    }
  }
  SUBCASE("flipped payload byte") {
    auto bad = bytes;
    bad[bad.size() - 20] ^= 0x40;
    spit(dir / "f.ckpt", bad);
    CHECK_THROWS_WITH_AS(load_params(dir / "f.ckpt", b), doctest::Contains("checksum"), CheckpointError);
  }
  SUBCASE("trailing bytes") {
    spit(dir / "x.ckpt", bytes + "zz");
    CHECK_THROWS_AS(load_params(dir / "x.ckpt", b), CheckpointError);
  }
  SUBCASE("bad magic") {
    spit(dir / "m2.ckpt", "NOTACKPT" + bytes.substr(8));
    CHECK_THROWS_AS(load_params(dir / "m2.ckpt", b), CheckpointError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_params(dir / "none.ckpt", b), CheckpointError); }
  // Nothing was half-loaded.
  CHECK_FALSE(same_params(a, b));
}

TEST_CASE("manifest and dtype mismatches are rejected") {
  testing::TempDir dir("ckpt-manifest");
  Model<float> a(tiny_config(), 1);
  save_params(dir / "m.ckpt", a);

  auto wider = tiny_config();
  wider.hidden = 10;
  Model<float> b(wider, 1);
  CHECK_THROWS_WITH_AS(load_params(dir / "m.ckpt", b), doctest::Contains("manifest"), CheckpointError);

  auto other_vocab = tiny_config(12);
  Model<float> c(other_vocab, 1);
  CHECK_THROWS_AS(load_params(dir / "m.ckpt", c), CheckpointError);

  auto extra = tiny_config();
  extra.edit_prev_hidden_input = true;
  Model<float> d(extra, 1);
  CHECK_THROWS_AS(load_params(dir / "m.ckpt", d), CheckpointError);

  Model<double> e(tiny_config(), 1);
  CHECK_THROWS_WITH_AS(load_params(dir / "m.ckpt", e), doctest::Contains("32-bit"), CheckpointError);
}
