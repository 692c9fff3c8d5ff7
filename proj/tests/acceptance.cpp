// Acceptance suite: one line per criterion, nonzero exit when any fails.
// An optional argv[1] names the gsplit CLI binary (used by criterion 9).

#include "gsplit/densify.hpp"
#include "gsplit/edit.hpp"
#include "gsplit/errors.hpp"
#include "gsplit/metrics.hpp"
#include "gsplit/parallel.hpp"
#include "gsplit/ply_io.hpp"
#include "gsplit/split.hpp"
#include "test_support.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace gsplit;
using namespace gsplit::testing;

namespace {

namespace fs = std::filesystem;

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string title)
        : number_(number), title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

    void expect(bool ok, const std::string& detail) {
        if (!ok) problems_.push_back(detail);
        checks_.push_back(detail + (ok ? " [ok]" : " [FAILED]"));
    }

    void finish(double runtime_limit_s = 0.0) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (runtime_limit_s > 0.0 && secs >= runtime_limit_s) {
            problems_.push_back("runtime " + std::to_string(secs) + " s exceeds " +
                                std::to_string(runtime_limit_s) + " s");
        }
        const bool ok = problems_.empty();
        if (!ok) ++g_failures;
        std::printf("[%s] criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", number_,
                    title_.c_str(), secs);
        for (const std::string& line : checks_) std::printf("        %s\n", line.c_str());
        std::fflush(stdout);
    }

private:
    int number_;
    std::string title_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> problems_;
    std::vector<std::string> checks_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Mat3 raw_second(const Gaussian& g) {
    return g.opacity_mass * (covariance(g) + g.position * g.position.transpose());
}

// ---------------------------------------------------------------------------

void criterion_1_conservation() {
    Criterion c(1, "conservation of zero/first/second moments over 1e4 crossing splits");
    Rng rng(20260801);
    double worst_zero = 0, worst_first = 0, worst_second = 0;
    for (int it = 0; it < 10000; ++it) {
        const Gaussian g = random_gaussian(rng);
        const Plane p = random_crossing_plane(rng, g);
        const SplitOutcome out = split_at_plane(g, p);
        if (!out.did_split()) continue;
        const Gaussian& l = out.left;
        const Gaussian& r = out.right;
        worst_zero = std::max(worst_zero, std::abs(l.opacity_mass + r.opacity_mass - g.opacity_mass) /
                                              g.opacity_mass);
        worst_first = std::max(
            worst_first, rel_err((l.opacity_mass * l.position + r.opacity_mass * r.position).eval(),
                                 (g.opacity_mass * g.position).eval()));
        worst_second =
            std::max(worst_second, rel_err((raw_second(l) + raw_second(r)).eval(), raw_second(g)));
    }
    c.expect(worst_zero <= 1e-12, "zero-moment residual " + fmt(worst_zero) + " <= 1e-12");
    c.expect(worst_first <= 1e-9, "first-moment residual " + fmt(worst_first) + " <= 1e-9");
    c.expect(worst_second <= 1e-9, "second-moment residual " + fmt(worst_second) + " <= 1e-9");
    c.finish(10.0);
}

void criterion_2_mc_oracle() {
    Criterion c(2, "closed-form truncated moments within 3 SE of 1e6-sample Monte Carlo");
    std::vector<Gaussian> gs(100);
    std::vector<Plane> ps(100);
    Rng rng(77003);
    for (int i = 0; i < 100; ++i) {
        gs[i] = random_gaussian(rng);
        ps[i] = random_crossing_plane(rng, gs[i]);
    }
    std::atomic<int> bad{0};
    std::atomic<int> checked{0};
    parallel_for(100, [&](std::size_t i) {
        const Side side = i % 2 == 0 ? Side::Negative : Side::Positive;
        const HalfspaceMoments cf = halfspace_moments(gs[i], ps[i], side);
        const McMoments mc = mc_halfspace_moments(gs[i], ps[i], 1000000, 31000 + i, side);
        const auto check = [&](double value, double est, double se) {
            ++checked;
            const double slack = se > 0 ? 3.0 * se : 1e-12;
            if (std::abs(value - est) > slack) ++bad;
        };
        check(cf.mass, mc.mass, mc.mass_se);
        for (int k = 0; k < 3; ++k) check(cf.first[k], mc.first[k], mc.first_se[k]);
        for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s) check(cf.second(r, s), mc.second(r, s), mc.second_se(r, s));
    });
    c.expect(bad == 0, std::to_string(checked.load()) + " moment components compared, " +
                           std::to_string(bad.load()) + " outside 3 SE");
    c.finish(60.0);
}

void criterion_3_half_normal() {
    Criterion c(3, "half-normal gold case at 1e-12");
    Gaussian g;
    const SplitOutcome out = split_at_plane(g, Plane{Vec3::UnitX(), 0.0});
    if (!out.did_split()) {
        c.expect(false, "split did not trigger");
        c.finish();
        return;
    }
    const double mean_err = std::abs(out.left.position.x() + 0.7978845608028654);
    const double var_err = std::abs(covariance(out.left)(0, 0) - 0.3633802276324187);
    const double mass_err = std::abs(out.left.opacity_mass - 0.5);
    c.expect(mass_err <= 1e-12, "alpha_l error " + fmt(mass_err));
    c.expect(mean_err <= 1e-12, "mu_l,x error " + fmt(mean_err));
    c.expect(var_err <= 1e-12, "Sigma_l,xx error " + fmt(var_err));
    c.finish();
}

void criterion_4_split_merge() {
    Criterion c(4, "merge(split(g,p)) = g within 1e-9 over 1e4 cases");
    Rng rng(513377);
    double worst = 0;
    for (int it = 0; it < 10000; ++it) {
        const Gaussian g = random_gaussian(rng);
        const Plane p = random_crossing_plane(rng, g);
        const SplitOutcome out = split_at_plane(g, p);
        if (!out.did_split()) continue;
        const Gaussian back = merge(out.left, out.right);
        worst = std::max({worst, rel_err(back.opacity_mass, g.opacity_mass),
                          rel_err(back.position, g.position),
                          rel_err(covariance(back), covariance(g))});
    }
    c.expect(worst <= 1e-9, "worst relative round-trip error " + fmt(worst));
    c.finish();
}

void criterion_5_table_orderings() {
    Criterion c(5, "table orderings on a 5e4-splat box shell, plane n=(0.5401,0.8316,0.0963), gap 0.2");
    const SplatModel m = box_shell_model(42, 50000);
    const Plane p = shell_cut_plane();
    const double gap = 0.2; // pieces pulled apart by 10% of the box width

    const EditOutcome move = plane_split_edit(m, p, gap, EditStrategy::Move);
    const EditOutcome remove = plane_split_edit(m, p, gap, EditStrategy::Remove);
    const EditOutcome once = plane_split_edit(m, p, gap, EditStrategy::Ours, 1);
    const EditOutcome twice = plane_split_edit(m, p, gap, EditStrategy::Ours, 2);

    c.expect(once.report.e_e <= 0.01 * move.report.e_e,
             "ours E_e <= 0.01 move E_e: " + fmt(once.report.e_e) + " vs " +
                 fmt(move.report.e_e) + " (ratio " + fmt(once.report.e_e / move.report.e_e) + ")");
    c.expect(once.report.e_i <= 0.5 * remove.report.e_i,
             "ours E_i <= 0.5 remove E_i: " + fmt(once.report.e_i) + " vs " +
                 fmt(remove.report.e_i) + " (ratio " + fmt(once.report.e_i / remove.report.e_i) +
                 ")");
    c.expect(twice.report.e_e <= once.report.e_e,
             "ours-twice E_e <= ours-once E_e: " + fmt(twice.report.e_e) + " vs " +
                 fmt(once.report.e_e));
    c.finish(120.0);
}

void criterion_6_homogenize() {
    Criterion c(6, "homogenize fixpoint within 8 rounds and per-round shrink factor");
    // Stress model: structural inhomogeneity up to gamma = 250.
    Rng rng(29);
    SplatModel stress;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Gaussian g = random_gaussian(rng);
        g.scales = Vec3(0.02 * (1.0 + 249.0 * u(rng)), 0.02, 0.02 * (0.5 + u(rng) * 0.5));
        stress.gaussians.push_back(g);
    }
    const auto [out, report] = homogenize(stress, 5.0, 8);
    c.expect(!report.rounds_exhausted && report.gamma_max <= 5.0,
             "stress model: gamma max " + fmt(report.gamma_max) + " after " +
                 std::to_string(report.split_rounds) + " rounds");

    const auto [shell_out, shell_report] = homogenize(box_shell_model(7, 5000), 5.0, 8);
    c.expect(!shell_report.rounds_exhausted && shell_report.gamma_max <= 5.0,
             "box shell: gamma max " + fmt(shell_report.gamma_max));

    Gaussian aligned;
    aligned.scales = Vec3(4.0, 1.0, 0.5);
    SplatModel single;
    single.gaussians.push_back(aligned);
    const auto [children, one_round] = homogenize(single, 1.5, 1);
    (void)one_round;
    double worst = 0;
    for (const Gaussian& child : children.gaussians) {
        worst = std::max(worst,
                         std::abs(child.scales.maxCoeff() - 4.0 * 0.6028102749890869));
    }
    c.expect(worst <= 1e-6, "split-axis shrink factor error " + fmt(worst) + " <= 1e-6");
    c.finish();
}

void criterion_7_densify_points() {
    Criterion c(7, "densify-for-points fixpoint at eta 2 and child masses at d0 = 2 tau");
    Rng rng(31);
    SplatModel m;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 400; ++i) {
        Gaussian g = random_gaussian(rng);
        const double base = 0.04 + 0.02 * u(rng);
        g.scales = Vec3::Constant(base);
        if (i % 4 == 0) g.scales[0] = base * (3.0 + 3.0 * u(rng)); // violators
        m.gaussians.push_back(g);
    }
    const auto [out, report] = densify_for_points(m, 2.0, 8);
    double r_m = 0;
    for (const Gaussian& g : out.gaussians) r_m += g.scales.maxCoeff();
    r_m /= static_cast<double>(out.size());
    double worst_pair = 0;
    for (const Gaussian& g : out.gaussians) {
        const GammaPairs pairs = gamma_ij(g, r_m);
        for (double v : pairs.values) worst_pair = std::max(worst_pair, v);
    }
    c.expect(!report.rounds_exhausted && worst_pair <= 2.0 + 1e-12,
             "fixpoint: max gamma_ij " + fmt(worst_pair) + " after " +
                 std::to_string(report.split_rounds) + " rounds, " + std::to_string(m.size()) +
                 " -> " + std::to_string(out.size()) + " splats");

    // Gold masses: split an eigen-aligned splat exactly as the pass does.
    Gaussian aligned;
    aligned.scales = Vec3(3.0, 0.5, 0.4);
    aligned.opacity_mass = 1.0;
    const Plane plane{Vec3::UnitX(), 2.0 * 3.0};
    const auto [tail, main] = split_ungated(aligned, plane);
    const double err_tail = std::abs(tail.opacity_mass - 0.0227501319481792);
    const double err_main = std::abs(main.opacity_mass - 0.9772498680518208);
    c.expect(err_tail <= 1e-9 && err_main <= 1e-9,
             "child masses (" + fmt(tail.opacity_mass) + ", " + fmt(main.opacity_mass) +
                 ") vs (0.02275, 0.97725): errors " + fmt(err_tail) + ", " + fmt(err_main));
    c.finish();
}

void criterion_8_ply_fuzz() {
    Criterion c(8, "PLY round trip over 100 fuzzed models; malformed headers rejected");
    Rng rng(991);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const fs::path dir = fs::temp_directory_path() / "gsplit_acceptance";
    fs::create_directories(dir);
    double worst = 0;
    bool all_ok = true;
    for (int it = 0; it < 100; ++it) {
        SplatModel m;
        m.sh_degree = it % 4;
        const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 40);
        for (std::size_t i = 0; i < n; ++i) {
            Gaussian g;
            g.position = Vec3(u(rng) * 8 - 4, u(rng) * 8 - 4, u(rng) * 8 - 4);
            g.rotation = random_rotation(rng);
            for (int k = 0; k < 3; ++k) g.scales[k] = std::exp(u(rng) * 5.0 - 3.0);
            const double peak = 0.01 + 0.98 * u(rng);
            g.opacity_mass = peak * 15.749609945722419 * g.scales.prod();
            g.sh_coeffs.resize(Gaussian::sh_size(m.sh_degree));
            for (double& s : g.sh_coeffs) s = u(rng) * 4 - 2;
            m.gaussians.push_back(std::move(g));
        }
        const fs::path p1 = dir / "a.ply";
        const fs::path p2 = dir / "b.ply";
        save_model(m, p1);
        const SplatModel a = load_model(p1);
        save_model(a, p2);
        const SplatModel b = load_model(p2);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const Gaussian& ga = a.gaussians[i];
            const Gaussian& gb = b.gaussians[i];
            worst = std::max(worst, (ga.position - gb.position).norm() / (1.0 + ga.position.norm()));
            worst = std::max(worst, rel_err(gb.scales, ga.scales));
            worst = std::max(worst, rel_err(gb.opacity_mass, ga.opacity_mass));
            worst = std::max(worst,
                             (ga.rotation.coeffs() - gb.rotation.coeffs()).norm());
            for (std::size_t k = 0; k < ga.sh_coeffs.size(); ++k) {
                worst = std::max(worst, std::abs(ga.sh_coeffs[k] - gb.sh_coeffs[k]) /
                                            (1.0 + std::abs(ga.sh_coeffs[k])));
            }
        }
        all_ok = all_ok && a.size() == m.size() && b.size() == m.size();
    }
    c.expect(all_ok && worst <= 1e-6,
             "worst per-field load->save->load deviation " + fmt(worst) + " <= 1e-6");

    int rejected = 0;
    const fs::path bad = dir / "bad.ply";
    const auto expect_reject = [&](const std::string& content) {
        std::ofstream(bad, std::ios::trunc) << content;
        try {
            load_model(bad);
        } catch (const FormatError&) {
            ++rejected;
        } catch (const Error&) {
        }
    };
    expect_reject("not a ply\n");
    expect_reject("ply\nformat ascii 1.0\nelement vertex 0\nend_header\n");
    expect_reject("ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
                  "property float x\nend_header\n"); // missing everything else
    c.expect(rejected == 3, std::to_string(rejected) + "/3 malformed headers rejected");
    fs::remove_all(dir);
    c.finish();
}

void criterion_9_cli_determinism(const char* cli) {
    Criterion c(9, "repeated CLI runs with identical seeds are byte-identical");
    if (cli == nullptr) {
        c.expect(false, "no CLI path supplied to the acceptance binary");
        c.finish();
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "gsplit_acceptance_cli";
    fs::create_directories(dir);
    const fs::path input = dir / "scene.ply";
    save_model(box_shell_model(4242, 4000), input);

    const auto file_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    const auto run = [&](const std::string& env, const std::string& args) {
        const std::string cmd = env + std::string(cli) + " " + args + " >/dev/null 2>&1";
        return std::system(cmd.c_str());
    };

    bool ok = true;
    const std::string spec = "'{\"kind\":\"plane_split\",\"plane\":{\"normal\":[0.5401,0.8316,0.0963],"
                             "\"d\":0},\"gap\":0.1,\"strategy\":\"ours\",\"repeat\":2}'";
    for (int round = 1; round <= 2; ++round) {
        const std::string suffix = std::to_string(round);
        // Second round runs single-threaded: the worker cap must not change bytes.
        const std::string env = round == 2 ? "GSPLIT_THREADS=1 " : "";
        ok = ok && run(env, "edit --input " + input.string() + " --spec " + spec + " --output " +
                       (dir / ("edit" + suffix + ".ply")).string() + " --report " +
                       (dir / ("edit" + suffix + ".json")).string()) == 0;
        ok = ok && run(env, "homogenize --input " + input.string() + " --eta-gamma 2 --output " +
                       (dir / ("homog" + suffix + ".ply")).string()) == 0;
        ok = ok && run(env, "verify --input " + input.string() +
                       " --checks 50 --mc-samples 100000 --seed 42 --report " +
                       (dir / ("verify" + suffix + ".json")).string()) == 0;
    }
    c.expect(ok, "all CLI invocations exited 0 (second round with GSPLIT_THREADS=1)");
    std::ofstream(dir / "corrupt.ply") << "ply\nformat binary_little_endian 1.0\n"
                                          "element vertex 1\nproperty float x\nend_header\n";
    c.expect(run("", "info --input " + (dir / "corrupt.ply").string()) != 0,
             "info on a corrupt file exits nonzero");
    c.expect(file_bytes(dir / "edit1.ply") == file_bytes(dir / "edit2.ply") &&
                 !file_bytes(dir / "edit1.ply").empty(),
             "edit outputs byte-identical");
    c.expect(file_bytes(dir / "edit1.json") == file_bytes(dir / "edit2.json"),
             "edit reports byte-identical");
    c.expect(file_bytes(dir / "homog1.ply") == file_bytes(dir / "homog2.ply"),
             "homogenize outputs byte-identical");
    c.expect(file_bytes(dir / "verify1.json") == file_bytes(dir / "verify2.json"),
             "verify reports byte-identical");
    fs::remove_all(dir);
    c.finish();
}

} // namespace

int main(int argc, char** argv) {
    criterion_1_conservation();
    criterion_2_mc_oracle();
    criterion_3_half_normal();
    criterion_4_split_merge();
    criterion_5_table_orderings();
    criterion_6_homogenize();
    criterion_7_densify_points();
    criterion_8_ply_fuzz();
    criterion_9_cli_determinism(argc > 1 ? argv[1] : nullptr);

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    }
    return g_failures;
}
