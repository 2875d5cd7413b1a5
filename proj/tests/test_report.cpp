#include "support.hpp"

#include "lacuna/errors.hpp"
#include "lacuna/report.hpp"
#include "lacuna/sweeps.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lacuna;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("lacuna_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("config text parsing")
{
    RunConfig cfg;
    apply_config_text(cfg, "# comment\nprecision = 320\n\ntol=1e-20  # trailing\nseed = 42\nformat = csv\nc1 = 9.5\n");
    CHECK(cfg.precision_bits == 320);
    CHECK(cfg.tolerance == doctest::Approx(1e-20));
    CHECK(cfg.seed == 42);
    CHECK(cfg.format == Format::csv);
    CHECK(cfg.c1 == doctest::Approx(9.5));
    CHECK_THROWS_AS(apply_config_text(cfg, "bogus = 1"), Error);
    CHECK_THROWS_AS(apply_config_text(cfg, "precision = abc"), Error);
    CHECK_THROWS_AS(apply_config_text(cfg, "no equals sign"), Error);

    cfg.precision_bits = 32;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.precision_bits = 64;
    cfg.tolerance = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("atomic write leaves no temporaries")
{
    const auto dir = scratch("atomic");
    write_atomic(dir / "a.txt", "one");
    write_atomic(dir / "a.txt", "two");
    CHECK(slurp(dir / "a.txt") == "two");
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        (void)entry;
        ++files;
    }
    CHECK(files == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("csv quoting and jsonl")
{
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(to_jsonl({{{"a", 1}}, {{"b", 2}}}) == "{\"a\":1}\n{\"b\":2}\n");
}

TEST_CASE("instance streams depend only on seed and id")
{
    InstanceRng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    const double xa = a.uniform();
    CHECK(xa == b.uniform());
    CHECK(xa != c.uniform());
    CHECK(xa != d.uniform());
    InstanceRng r(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        const int k = r.integer(2, 5);
        CHECK((k >= 2 && k <= 5));
    }
}

TEST_CASE("random unit polynomials have norm in [1 - 2^-40, 1]")
{
    InstanceRng rng(5, 0);
    for (int deg : {1, 7, 30}) {
        const Poly p = random_unit_poly(rng, deg, 256);
        CHECK(p.degree() == deg);
        PrecisionScope scope(p.work_bits());
        const NormResult n = sup_norm(p, ldexp(Real(1), -60));
        CHECK(n.upper <= Real(1) + ldexp(Real(1), -100));
        CHECK(n.lower >= Real(1) - ldexp(Real(1), -39));
    }
}

TEST_CASE("empty sweep writes header-only tables")
{
    const auto dir = scratch("empty");
    RunConfig cfg;
    cfg.output_dir = dir;
    SweepOptions opts;
    opts.lemma = "spreading";
    opts.count = 0;
    const auto res = run_sweep(opts, cfg);
    const auto files = emit_sweep(res, cfg);
    CHECK(files.size() == 3);
    CHECK(slurp(dir / "sweep_spreading.csv") == "instance_id,lemma,claimed,measured,slack,pass\n");
    CHECK(slurp(dir / "sweep_spreading.jsonl").empty());
    const auto doc = nlohmann::json::parse(slurp(dir / "sweep_spreading.json"));
    CHECK(doc["instances"] == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweeps are deterministic and thread-count independent")
{
    RunConfig cfg;
    cfg.seed = 11;
    for (const std::string lemma : {"vmarkov", "remez", "spreading", "comparison"}) {
        CAPTURE(lemma);
        SweepOptions opts;
        opts.lemma = lemma;
        opts.count = 6;
        opts.threads = 1;
        const auto one = run_sweep(opts, cfg);
        opts.threads = 3;
        const auto three = run_sweep(opts, cfg);
        CHECK(one.to_csv() == three.to_csv());
        CHECK(one.to_jsonl() == three.to_jsonl());
        CHECK(one.summary().dump() == three.summary().dump());
        CHECK(one.count("pass") == 6);
    }
}

TEST_CASE("sweep argument validation")
{
    RunConfig cfg;
    SweepOptions opts;
    opts.lemma = "nope";
    CHECK_THROWS_AS(run_sweep(opts, cfg), Error);
    opts.lemma = "vmarkov";
    opts.count = -1;
    CHECK_THROWS_AS(run_sweep(opts, cfg), Error);
}

TEST_CASE("claim sweep counts kappa skips")
{
    RunConfig cfg;
    cfg.seed = 7;
    SweepOptions opts;
    opts.lemma = "claim";
    opts.count = 4;
    const auto res = run_sweep(opts, cfg);
    CHECK(res.count("pass") + res.count("skipped") == 4);
    CHECK(res.count("fail") == 0);
    CHECK(res.count("error") == 0);
}
