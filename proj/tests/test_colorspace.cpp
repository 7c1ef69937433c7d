#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fgmatte/colorspace.hpp"
#include "support/oracles.hpp"

using namespace fgmatte;

TEST_CASE("gamma fixed points are exact") {
    CHECK(srgb_to_linear(0.0) == 0.0);
    CHECK(srgb_to_linear(1.0) == 1.0);
    CHECK(linear_to_srgb(0.0) == 0.0);
    CHECK(linear_to_srgb(1.0) == 1.0);
    CHECK(srgb_to_linear(0.04045) == doctest::Approx(0.04045 / 12.92).epsilon(1e-15));
}

TEST_CASE("gamma maps stay within range and are monotone per branch") {
    const GammaParams g2;          // paper default
    const GammaParams g24{2.4};    // branches meet at the knee
    double prev2_lower = -1.0, prev24 = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double l = double(i) / 10000.0;
        const double s2 = linear_to_srgb(l, g2);
        CHECK(s2 >= 0.0);
        CHECK(s2 <= 1.0);
        // gamma = 2.4: monotone across the whole range
        const double s24 = linear_to_srgb(l, g24);
        CHECK(s24 >= prev24 - 1e-12);
        prev24 = s24;
        // gamma = 2: monotone within each branch
        if (l <= 0.0031308) {
            CHECK(s2 >= prev2_lower);
            prev2_lower = s2;
        }
    }
    double prev_upper = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double l = 0.0031308 + (1.0 - 0.0031308) * double(i) / 10000.0 + 1e-9;
        const double s2 = linear_to_srgb(std::min(l, 1.0), g2);
        CHECK(s2 >= prev_upper - 1e-12);
        prev_upper = s2;
    }
    // srgb_to_linear is monotone nondecreasing across the knee even at
    // gamma = 2 (the branch jump is upward).
    double prev_inv = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double s = double(i) / 10000.0;
        const double l = srgb_to_linear(s, g2);
        CHECK(l >= prev_inv);
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
        prev_inv = l;
    }
}

TEST_CASE("gamma roundtrip away from the knee") {
    // The branch constants are not mutually inverse at gamma = 2: inputs in
    // the sliver (0.0404499..., 0.04045] go down the lower branch but come
    // back through the upper one. Everywhere else the roundtrip is exact to
    // rounding.
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double s = double(i) / 999.0;
        if (std::abs(s - 0.04045) < 1e-4) continue;
        const double rt = linear_to_srgb(srgb_to_linear(s));
        worst = std::max(worst, std::abs(rt - s));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("knee roundtrip deviation is the documented jump") {
    // Measured worst case inside the sliver: ~3.64e-2 (the price of reusing
    // sRGB branch constants with gamma = 2).
    const double s = 0.04045; // lower branch forward, upper branch back
    const double rt = linear_to_srgb(srgb_to_linear(s));
    CHECK(std::abs(rt - s) == doctest::Approx(0.0364).epsilon(0.02));
}

TEST_CASE("white point recovery of an exact linear relation") {
    std::mt19937_64 rng(127);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    const std::array<std::array<double, 3>, 3> a = {{{1.1, 0.05, -0.02}, {0.0, 0.93, 0.04}, {-0.03, 0.02, 1.07}}};
    const std::size_t n = 200;
    std::vector<std::array<double, 3>> v(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) v[i][std::size_t(c)] = dist(rng);
        for (int r = 0; r < 3; ++r)
            w[i][std::size_t(r)] = a[std::size_t(r)][0] * v[i][0] + a[std::size_t(r)][1] * v[i][1] +
                                   a[std::size_t(r)][2] * v[i][2];
    }
    const WhitePointFit fit = fit_white_point(v, w);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(fit.m[std::size_t(r)][std::size_t(c)] - a[std::size_t(r)][std::size_t(c)]) < 1e-10);
    CHECK(fit.residual <= 1e-18);

    // Identity fit
    const WhitePointFit id = fit_white_point(v, v);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(id.m[std::size_t(r)][std::size_t(c)] == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-12));
    CHECK(id.residual <= 1e-20);

    // Applying the fitted M reproduces the targets (pre-clamp values all in
    // range here).
    Image src(int(n), 1, 3);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) src.at(int(i), 0, c) = v[i][std::size_t(c)];
    const Image mapped = apply_white_point(src, fit);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(mapped.at(int(i), 0, c) - clamp01(w[i][std::size_t(c)])) < 1e-9);
}

TEST_CASE("fit residual is locally optimal") {
    std::mt19937_64 rng(131);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const std::size_t n = 40;
    std::vector<std::array<double, 3>> v(n), w(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            v[i][std::size_t(c)] = dist(rng);
            w[i][std::size_t(c)] = dist(rng);
        }
    const WhitePointFit fit = fit_white_point(v, w);

    const auto residual_of = [&](const std::array<std::array<double, 3>, 3>& m) {
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (int r = 0; r < 3; ++r) {
                const double e = m[std::size_t(r)][0] * v[i][0] + m[std::size_t(r)][1] * v[i][1] +
                                 m[std::size_t(r)][2] * v[i][2] - w[i][std::size_t(r)];
                res += e * e;
            }
        return res;
    };
    CHECK(residual_of(fit.m) == doctest::Approx(fit.residual).epsilon(1e-12));

    std::normal_distribution<double> noise(0.0, 1e-3);
    for (int trial = 0; trial < 20; ++trial) {
        auto perturbed = fit.m;
        for (auto& row : perturbed)
            for (double& x : row) x += noise(rng);
        CHECK(residual_of(perturbed) >= fit.residual);
    }

    // Coordinate grid around the optimum on a tiny 2x2-image problem.
    std::vector<std::array<double, 3>> v4(v.begin(), v.begin() + 4), w4(w.begin(), w.begin() + 4);
    const WhitePointFit fit4 = fit_white_point(v4, w4);
    const auto res4 = [&](const std::array<std::array<double, 3>, 3>& m) {
        double res = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            for (int r = 0; r < 3; ++r) {
                const double e = m[std::size_t(r)][0] * v4[i][0] + m[std::size_t(r)][1] * v4[i][1] +
                                 m[std::size_t(r)][2] * v4[i][2] - w4[i][std::size_t(r)];
                res += e * e;
            }
        return res;
    };
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (double delta : {-1e-4, 1e-4}) {
                auto m = fit4.m;
                m[std::size_t(r)][std::size_t(c)] += delta;
                CHECK(res4(m) >= fit4.residual);
            }
}

TEST_CASE("fit rejects rank-deficient sources") {
    std::vector<std::array<double, 3>> v(10, {0.5, 0.5, 0.5}); // rank 1
    std::vector<std::array<double, 3>> w(10, {0.2, 0.3, 0.4});
    CHECK_THROWS_WITH_AS(fit_white_point(v, w), doctest::Contains("rank"), std::invalid_argument);
    CHECK_THROWS_AS(fit_white_point(std::vector<std::array<double, 3>>(2), std::vector<std::array<double, 3>>(2)),
                    std::invalid_argument);
}

TEST_CASE("apply_white_point identities") {
    std::mt19937_64 rng(137);
    const Image img = oracle::smooth_field(6, 5, 3, rng);
    WhitePointFit identity;
    for (int r = 0; r < 3; ++r) identity.m[std::size_t(r)][std::size_t(r)] = 1.0;
    const Image same = apply_white_point(img, identity);
    for (std::size_t i = 0; i < img.data().size(); ++i)
        CHECK(same.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-15));

    WhitePointFit half;
    for (int r = 0; r < 3; ++r) half.m[std::size_t(r)][std::size_t(r)] = 0.5;
    Image ones(2, 2, 3, 1.0);
    const Image scaled = apply_white_point(ones, half);
    for (double v : scaled.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("prepare_ground_truth pipelines") {
    std::mt19937_64 rng(139);
    // Keep linear values away from the gamma knee so the identity roundtrip
    // is clean.
    const Image fg_linear = oracle::smooth_field(8, 6, 3, rng, 0.05, 0.9);
    const Image img_linear = oracle::smooth_field(8, 6, 3, rng, 0.05, 0.9);

    SUBCASE("identity white point") {
        const Image img_srgb = linear_to_srgb(img_linear);
        const GroundTruthPair out = prepare_ground_truth(fg_linear, img_linear, img_srgb);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(out.fit.m[std::size_t(r)][std::size_t(c)] == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(5e-4));
        const Image expect = linear_to_srgb(fg_linear);
        for (std::size_t i = 0; i < expect.data().size(); ++i)
            CHECK(out.fg_gt.data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-4));
    }

    SUBCASE("same input gives identical outputs") {
        const Image img_srgb = linear_to_srgb(img_linear);
        const GroundTruthPair out = prepare_ground_truth(img_linear, img_linear, img_srgb);
        CHECK(out.fg_gt.data() == out.img_input.data()); // bitwise
    }

    SUBCASE("baked-in diagonal white point is recovered") {
        WhitePointFit baked;
        baked.m[0][0] = 1.1;
        baked.m[1][1] = 1.0;
        baked.m[2][2] = 0.9;
        Image img_wp(8, 6, 3);
        for (std::size_t i = 0; i < img_linear.pixel_count(); ++i)
            for (int r = 0; r < 3; ++r)
                img_wp.plane(r)[i] = clamp01(baked.m[std::size_t(r)][std::size_t(r)] * img_linear.plane(r)[i]);
        const Image img_srgb_wp = linear_to_srgb(img_wp);
        const GroundTruthPair out = prepare_ground_truth(fg_linear, img_linear, img_srgb_wp);

        // Hand-computed pipeline: M fg_linear, then gamma.
        for (std::size_t i = 0; i < fg_linear.pixel_count(); ++i)
            for (int r = 0; r < 3; ++r) {
                const double mapped = baked.m[std::size_t(r)][std::size_t(r)] * fg_linear.plane(r)[i];
                const double expect = clamp01(linear_to_srgb(mapped, GammaParams{}));
                CHECK(std::abs(out.fg_gt.plane(r)[i] - expect) < 1e-6);
            }
    }
}

TEST_CASE("fit is permutation invariant over pixels") {
    std::mt19937_64 rng(149);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const std::size_t n = 64;
    std::vector<std::array<double, 3>> v(n), w(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            v[i][std::size_t(c)] = dist(rng);
            w[i][std::size_t(c)] = dist(rng);
        }
    const WhitePointFit fit = fit_white_point(v, w);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::array<double, 3>> vs(n), ws(n);
    for (std::size_t i = 0; i < n; ++i) {
        vs[i] = v[order[i]];
        ws[i] = w[order[i]];
    }
    const WhitePointFit shuffled = fit_white_point(vs, ws);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(shuffled.m[std::size_t(r)][std::size_t(c)] ==
                  doctest::Approx(fit.m[std::size_t(r)][std::size_t(c)]).epsilon(1e-10));
    CHECK(shuffled.residual == doctest::Approx(fit.residual).epsilon(1e-10));
}
