#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "vpmac/channel.hpp"

using namespace vpmac;
using vpmac::testing::fading_channel;

namespace {

double standard_error(double q, double n) { return std::sqrt(q * (1.0 - q) / n); }

}  // namespace

TEST_CASE("profile indexing repeats the tail") {
    const Profile p({1.0, 0.5}, 0.25);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.5);
    CHECK(p[2] == 0.25);
    CHECK(p[1000] == 0.25);
    CHECK(p.support() == 2);
    CHECK(p.non_increasing());
    CHECK_FALSE(Profile({0.5, 0.7}, 0.0).non_increasing());
    CHECK_FALSE(Profile({0.5}, 0.7).non_increasing());
}

TEST_CASE("channel params reject invalid profiles") {
    const Profile ok({1.0}, 0.0);
    CHECK_THROWS_AS(ChannelParams(Profile({1.2}, 0.0), ok), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(ok, Profile({0.5}, -0.1)), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(Profile({std::nan("")}, 0.0), ok), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(Profile({1.0}, 0.0), Profile({0.2, 0.5}, 0.0)), std::invalid_argument);
    CHECK_NOTHROW(ChannelParams(Profile({0.2, 0.5}, 0.0), Profile({0.5, 0.2}, 0.0)));
}

TEST_CASE("derive_params: collision") {
    const ChannelParams p = derive_params(CollisionChannel{});
    CHECK(p.real[0] == 1.0);
    CHECK(p.virt[0] == 1.0);
    for (std::size_t j = 1; j < 20; ++j) {
        CHECK(p.real[j] == 0.0);
        CHECK(p.virt[j] == 0.0);
    }
}

TEST_CASE("derive_params: threshold fading matches the threshold rule exactly") {
    const ChannelParams p = derive_params(fading_channel());
    for (std::size_t j = 0; j < 4; ++j) CHECK(p.real[j] == 1.0);
    CHECK(p.real[4] == 0.7);
    CHECK(p.real[5] == 0.7);
    for (std::size_t j = 6; j < 30; ++j) CHECK(p.real[j] == 0.0);
    CHECK(p.real == p.virt);

    const ChannelParams zero = derive_params(ThresholdFadingChannel{{{1.0, 0}}});
    for (std::size_t j = 0; j < 10; ++j) CHECK(zero.real[j] == 0.0);

    // Random state sets: every derived virtual profile is non-increasing and
    // equals sum_s P(s) 1{j+1 <= M_s}.
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        ThresholdFadingChannel ch;
        const std::size_t n = 1 + rng.below(5);
        double left = 1.0;
        for (std::size_t s = 0; s < n; ++s) {
            const double prob = s + 1 == n ? left : left * rng.uniform();
            left -= prob;
            ch.states.push_back({prob, static_cast<std::uint32_t>(rng.below(10))});
        }
        const ChannelParams d = derive_params(ch);
        CHECK(d.virt.non_increasing());
        for (std::size_t j = 0; j < 12; ++j) {
            double expect = 0.0;
            for (const auto& st : ch.states) expect += (j + 1 <= st.capacity) ? st.probability : 0.0;
            CHECK(d.real[j] == doctest::Approx(expect).epsilon(1e-15));
        }
    }
}

TEST_CASE("derive_params: parametric is the identity") {
    const ChannelParams p(Profile({0.9, 0.4}, 0.1), Profile({0.8, 0.3}, 0.0));
    CHECK(derive_params(ParametricChannel{p}) == p);
}

TEST_CASE("model validation") {
    CHECK_NOTHROW(validate(fading_channel()));
    CHECK_THROWS_AS(validate(ThresholdFadingChannel{{{0.3, 4}, {0.6, 6}}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ThresholdFadingChannel{}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ThresholdFadingChannel{{{-0.1, 4}, {1.1, 6}}}), std::invalid_argument);
}

TEST_CASE("sample_slot: collision") {
    Rng rng(1);
    SlotOutcome single = sample_slot(CollisionChannel{}, {true, false}, rng);
    CHECK(single.n_transmitted == 1);
    REQUIRE(single.real_success.size() == 1);
    CHECK(single.real_success[0]);
    CHECK_FALSE(single.virtual_success);

    SlotOutcome idle = sample_slot(CollisionChannel{}, {false, false, false}, rng);
    CHECK(idle.n_transmitted == 0);
    CHECK(idle.real_success.empty());
    CHECK(idle.virtual_success);

    SlotOutcome clash = sample_slot(CollisionChannel{}, {true, true, false, true}, rng);
    CHECK(clash.n_transmitted == 3);
    CHECK(clash.real_success == std::vector<bool>{false, false, false});
    CHECK_FALSE(clash.virtual_success);
    CHECK(clash.n_success() == 0);
}

TEST_CASE("resolve_slot: threshold fading in the larger state") {
    Rng rng(2);
    const ChannelModel ch = fading_channel();
    const std::vector<bool> five(5, true);
    // State 1 has capacity 6: five packets and the virtual one all fit.
    const SlotOutcome out = resolve_slot(ch, std::size_t{1}, five, rng);
    CHECK(out.n_transmitted == 5);
    CHECK(out.real_success == std::vector<bool>(5, true));
    CHECK(out.virtual_success);
    CHECK(out.n_success() == 5);
    // State 0 has capacity 4.
    const SlotOutcome small = resolve_slot(ch, std::size_t{0}, five, rng);
    CHECK(small.real_success == std::vector<bool>(5, false));
    CHECK_FALSE(small.virtual_success);
    const SlotOutcome three = resolve_slot(ch, std::size_t{0}, {true, true, true}, rng);
    CHECK(three.real_success == std::vector<bool>(3, true));
    CHECK(three.virtual_success);
}

TEST_CASE("sample_slot: parametric with a pristine virtual packet") {
    const ChannelParams p(Profile({1.0}, 0.0), Profile({1.0}, 0.0));
    Rng rng(3);
    for (int i = 0; i < 100; ++i) CHECK(sample_slot(ParametricChannel{p}, {false, false}, rng).virtual_success);
}

TEST_CASE("sampling is reproducible for a fixed seed") {
    const ChannelModel ch = fading_channel();
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) {
        const std::vector<bool> flags{i % 2 == 0, i % 3 == 0, true, i % 5 == 0, false, true, true};
        const SlotOutcome x = sample_slot(ch, flags, a);
        const SlotOutcome y = sample_slot(ch, flags, b);
        CHECK(x.real_success == y.real_success);
        CHECK(x.virtual_success == y.virtual_success);
        CHECK(x.channel_state == y.channel_state);
    }
}

TEST_CASE("marginal consistency: empirical frequencies match derived params") {
    constexpr int kSlots = 100000;
    const ChannelParams rand_params(Profile({0.95, 0.6, 0.3}, 0.1), Profile({0.9, 0.7, 0.2}, 0.05));
    const std::vector<ChannelModel> models{fading_channel(), ParametricChannel{rand_params}};
    for (const auto& model : models) {
        const ChannelParams d = derive_params(model);
        for (std::size_t n : {1u, 3u, 4u, 5u, 6u}) {
            Rng rng(1000 + n);
            const std::vector<bool> flags(n, true);
            double virt = 0.0, real = 0.0;
            for (int s = 0; s < kSlots; ++s) {
                const SlotOutcome out = sample_slot(model, flags, rng);
                virt += out.virtual_success ? 1.0 : 0.0;
                real += out.real_success[0] ? 1.0 : 0.0;
            }
            const double qv = d.virt[n];
            const double qr = d.real[n - 1];
            CAPTURE(n);
            CHECK(std::abs(virt / kSlots - qv) <= 4.0 * standard_error(qv, kSlots) + 1e-12);
            CHECK(std::abs(real / kSlots - qr) <= 4.0 * standard_error(qr, kSlots) + 1e-12);
        }
    }
}
