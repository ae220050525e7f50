#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "padlens/engine.hpp"
#include "test_support.hpp"

using namespace padlens;
using namespace padlens::testing;

namespace {

KernelSet ones_kernel(int out, int in, int k) { return KernelSet(out, in, k, k, 1.0); }

LayerSpec conv_layer(PadMode mode, int k = 3, int s = 1) {
    return LayerSpec::conv2d(1, 1, k, s,
                             mode == PadMode::valid ? PaddingSpec::valid_pad()
                                                    : PaddingSpec::same_pad(mode));
}

}  // namespace

TEST_CASE("all-ones conv on all-ones input counts window overlap") {
    const FeatureMap in(3, 3, 1, 1.0);
    const FeatureMap out = conv2d(in, ones_kernel(1, 1, 3), conv_layer(PadMode::zero));
    CHECK(out.data == std::vector<double>{4, 6, 4, 6, 9, 6, 4, 6, 4});

    const FeatureMap circ = conv2d(in, ones_kernel(1, 1, 3), conv_layer(PadMode::circular));
    for (double v : circ.data) CHECK(v == 9.0);
}

TEST_CASE("identity kernel passes the input through under any padding") {
    const FeatureMap in = random_map(4, 5, 1, 3);
    KernelSet id(1, 1, 3, 3, 0.0);
    id.at(0, 0, 1, 1) = 1.0;
    for (PadMode mode : {PadMode::zero, PadMode::circular, PadMode::mirror_symmetric,
                         PadMode::mirror_reflect, PadMode::replicate}) {
        CHECK(conv2d(in, id, conv_layer(mode)).data == in.data);
    }
}

TEST_CASE("bias and multi-channel accumulation") {
    FeatureMap in(2, 2, 2);
    in.data = {1, 2, 3, 4, 10, 20, 30, 40};
    KernelSet k(1, 2, 1, 1, 0.0);
    k.at(0, 0, 0, 0) = 1.0;
    k.at(0, 1, 0, 0) = 0.5;
    k.biases[0] = 100.0;
    LayerSpec l = LayerSpec::conv2d(2, 1, 1, 1, PaddingSpec::valid_pad());
    const FeatureMap out = conv2d(in, k, l);
    CHECK(out.data == std::vector<double>{106, 112, 118, 124});
}

TEST_CASE("depthwise conv applies one kernel per channel") {
    FeatureMap in(2, 2, 2);
    in.data = {1, 2, 3, 4, 10, 20, 30, 40};
    KernelSet k(2, 1, 1, 1, 0.0);
    k.at(0, 0, 0, 0) = 2.0;
    k.at(1, 0, 0, 0) = 3.0;
    LayerSpec l = LayerSpec::depthwise(2, 1, 1, PaddingSpec::valid_pad());
    const FeatureMap out = conv2d(in, k, l);
    CHECK(out.data == std::vector<double>{2, 4, 6, 8, 30, 60, 90, 120});
}

TEST_CASE("kernel shape mismatches are rejected") {
    const FeatureMap in(4, 4, 2, 1.0);
    CHECK_THROWS_AS(conv2d(in, ones_kernel(1, 1, 3), conv_layer(PadMode::zero)),
                    std::invalid_argument);
    LayerSpec l = LayerSpec::conv2d(2, 3, 3, 1, PaddingSpec::same_pad(PadMode::zero));
    CHECK_THROWS_AS(conv2d(in, ones_kernel(3, 2, 5), l), std::invalid_argument);
}

TEST_CASE("partial conv rescales boundary windows") {
    const FeatureMap in(3, 3, 1, 1.0);
    LayerSpec l = conv_layer(PadMode::partial_conv);
    const FeatureMap out = partial_conv2d(in, ones_kernel(1, 1, 3), l);
    for (double v : out.data) CHECK(v == 9.0);  // corner: 4 * 9/4

    const FeatureMap c(5, 4, 1, 0.5);
    const FeatureMap oc = partial_conv2d(c, ones_kernel(1, 1, 3), l);
    for (double v : oc.data) CHECK(v == 4.5);
}

TEST_CASE("partial conv equals zero-padded conv away from the border") {
    const FeatureMap in = random_map(9, 9, 2, 5);
    LayerSpec l = LayerSpec::conv2d(2, 3, 3, 1, PaddingSpec::same_pad(PadMode::partial_conv));
    KernelSet k(3, 2, 3, 3);
    std::mt19937_64 rng(8);
    for (double& w : k.weights) w = (rng() >> 11) * 0x1.0p-53 - 0.5;
    for (double& b : k.biases) b = (rng() >> 11) * 0x1.0p-53;

    const FeatureMap pc = partial_conv2d(in, k, l);
    LayerSpec lz = l;
    lz.padding = PaddingSpec::same_pad(PadMode::zero);
    const FeatureMap zc = conv2d(in, k, lz);
    for (int o = 0; o < 3; ++o) {
        for (int y = 1; y < 8; ++y) {
            for (int x = 1; x < 8; ++x) {
                CHECK(pc.at(o, y, x) == zc.at(o, y, x));  // bitwise
            }
        }
    }
    CHECK(pc.at(0, 0, 0) != zc.at(0, 0, 0));
}

TEST_CASE("partial conv bias is added after rescaling, unscaled") {
    FeatureMap in(3, 3, 1, 1.0);
    KernelSet k = ones_kernel(1, 1, 3);
    k.biases[0] = 5.0;
    const FeatureMap out = partial_conv2d(in, k, conv_layer(PadMode::partial_conv));
    for (double v : out.data) CHECK(v == 14.0);  // 9 + 5, even at corners
}

TEST_CASE("maxpool examples") {
    FeatureMap in(2, 2, 1);
    in.data = {1, 2, 3, 4};
    const FeatureMap out = maxpool(in, LayerSpec::pool(2, 2));
    CHECK(out.data == std::vector<double>{4});

    FeatureMap big(5, 5, 1);
    for (int i = 0; i < 25; ++i) big.data[i] = i;
    const FeatureMap p = maxpool(big, LayerSpec::pool(2, 2));
    CHECK(p.height == 2);  // row 4 and column 4 eroded
    CHECK(p.data == std::vector<double>{6, 8, 16, 18});

    const FeatureMap c(4, 4, 3, 2.5);
    for (double v : maxpool(c, LayerSpec::pool(2, 2)).data) CHECK(v == 2.5);
}

TEST_CASE("maxpool same-zero padding cannot win over negative values") {
    FeatureMap neg(2, 2, 1);
    neg.data = {-5, -6, -7, -8};
    LayerSpec l = LayerSpec::pool(3, 1, PaddingSpec::same_pad(PadMode::zero));
    const FeatureMap out = maxpool(neg, l);
    CHECK(out.data == std::vector<double>{-5, -5, -5, -5});
    CHECK(out.all_finite());
}

TEST_CASE("relu examples") {
    FeatureMap m(1, 3, 1);
    m.data = {-1, 0, 2};
    CHECK(relu(m).data == std::vector<double>{0, 0, 2});

    const FeatureMap neg(2, 2, 1, -3.0);
    for (double v : relu(neg).data) CHECK(v == 0.0);

    const FeatureMap pos = random_map(3, 3, 2, 6, 0.0, 1.0);
    CHECK(relu(pos).data == pos.data);
}

TEST_CASE("forward with zero weights yields zero maps") {
    const NetworkSpec spec = conv_chain(3, PadMode::zero, 3, 1, 1, 2);
    const WeightSet ws = random_weights(spec, 1, WeightDistribution::constant(0.0));
    const FeatureMap in = random_map(6, 6, 2, 9);
    for (const FeatureMap& out : forward(spec, ws, in)) {
        for (double v : out.data) CHECK(v == 0.0);
    }
}

TEST_CASE("forward of a single relu layer") {
    NetworkSpec spec;
    spec.input_channels = 1;
    spec.layers.push_back(LayerSpec::relu());
    spec.validate();
    const FeatureMap in = random_map(4, 4, 1, 10);
    const std::vector<FeatureMap> outs = forward(spec, WeightSet{}, in);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].data == relu(in).data);
}

TEST_CASE("zero input with a layer-1 bias leaves a one-pixel border at layer 2") {
    NetworkSpec spec = conv_chain(2, PadMode::zero, 3, 1, 1, 1);
    WeightSet ws = random_weights(spec, 4);
    for (double& b : ws.layers.at(0).biases) b = 1.0;
    const FeatureMap zeros(8, 8, 1);
    const std::vector<FeatureMap> outs = forward(spec, ws, zeros);

    CHECK(channel_range(outs[0], 0) == 0.0);  // first map constant
    const FeatureMap& second = outs[1];
    CHECK(channel_range(second, 0, 1) == 0.0);  // constant interior
    CHECK(channel_range(second, 0) > 1e-6);     // border deviates
}

TEST_CASE("forward propagates errors with the layer index") {
    NetworkSpec spec = conv_chain(2, PadMode::zero, 3, 1, 1, 1);
    WeightSet ws = random_weights(spec, 2);
    ws.layers.erase(1);
    try {
        forward(spec, ws, FeatureMap(5, 5, 1));
        FAIL("expected missing weights");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
    CHECK_THROWS_AS(forward(spec, ws, FeatureMap(5, 5, 3)), std::invalid_argument);
}

TEST_CASE("add_from performs elementwise addition") {
    NetworkSpec spec;
    spec.input_channels = 1;
    spec.layers.push_back(LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::same_pad(PadMode::zero)));
    spec.layers.push_back(LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::same_pad(PadMode::zero)));
    spec.layers.push_back(LayerSpec::add(0));
    spec.validate();
    WeightSet ws = random_weights(spec, 11);
    const FeatureMap in = random_map(6, 6, 1, 12);
    const std::vector<FeatureMap> outs = forward(spec, ws, in);
    for (std::size_t k = 0; k < outs[2].data.size(); ++k) {
        CHECK(outs[2].data[k] == outs[1].data[k] + outs[0].data[k]);
    }
}

TEST_CASE("record last returns only the final map") {
    const NetworkSpec spec = conv_chain(3, PadMode::zero, 3, 1, 1, 1);
    const WeightSet ws = random_weights(spec, 13);
    const FeatureMap in = random_map(7, 7, 1, 14);
    const auto all = forward(spec, ws, in, Record::all);
    const auto last = forward(spec, ws, in, Record::last);
    REQUIRE(last.size() == 1);
    CHECK(last[0].data == all.back().data);
}

TEST_CASE("translation consistency away from borders") {
    const int dy = 2, dx = 3;
    const FeatureMap in = random_map(12, 12, 1, 15);
    FeatureMap shifted(12, 12, 1);
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 12; ++x) {
            const int sy = y - dy, sx = x - dx;
            shifted.at(0, y, x) =
                sy >= 0 && sy < 12 && sx >= 0 && sx < 12 ? in.at(0, sy, sx) : 0.0;
        }
    }
    KernelSet k(1, 1, 3, 3);
    std::mt19937_64 rng(16);
    for (double& w : k.weights) w = (rng() >> 11) * 0x1.0p-53 - 0.5;
    const LayerSpec l = conv_layer(PadMode::zero);
    const FeatureMap a = conv2d(in, k, l);
    const FeatureMap b = conv2d(shifted, k, l);
    for (int y = 1; y < 12 - dy - 1; ++y) {
        for (int x = 1; x < 12 - dx - 1; ++x) {
            CHECK(b.at(0, y + dy, x + dx) == a.at(0, y, x));  // exact
        }
    }
}

TEST_CASE("constant propagation under circular and symmetric padding") {
    for (PadMode mode : {PadMode::circular, PadMode::mirror_symmetric}) {
        NetworkSpec spec;
        spec.input_channels = 2;
        for (int i = 0; i < 3; ++i) {
            spec.layers.push_back(LayerSpec::conv2d(2, 2, 3, 1, PaddingSpec::same_pad(mode)));
            spec.layers.push_back(LayerSpec::relu());
        }
        spec.validate();
        const WeightSet ws = random_weights(spec, 18);
        FeatureMap in(9, 9, 2);
        for (int y = 0; y < 9; ++y) {
            for (int x = 0; x < 9; ++x) {
                in.at(0, y, x) = 0.3;
                in.at(1, y, x) = -0.8;
            }
        }
        for (const FeatureMap& out : forward(spec, ws, in)) {
            CHECK(per_channel_constant(out));
        }
    }
}

TEST_CASE("conv2d is linear in the map with zero bias") {
    const FeatureMap x = random_map(6, 6, 2, 19);
    const FeatureMap y = random_map(6, 6, 2, 20);
    KernelSet k(2, 2, 3, 3);
    std::mt19937_64 rng(21);
    for (double& w : k.weights) w = (rng() >> 11) * 0x1.0p-53 - 0.5;
    const LayerSpec l = LayerSpec::conv2d(2, 2, 3, 1, PaddingSpec::same_pad(PadMode::zero));

    const double a = 0.75, b = -1.25;
    FeatureMap combo(6, 6, 2);
    for (std::size_t i = 0; i < combo.data.size(); ++i) {
        combo.data[i] = a * x.data[i] + b * y.data[i];
    }
    const FeatureMap lhs = conv2d(combo, k, l);
    const FeatureMap cx = conv2d(x, k, l);
    const FeatureMap cy = conv2d(y, k, l);
    FeatureMap rhs(6, 6, 2);
    for (std::size_t i = 0; i < rhs.data.size(); ++i) {
        rhs.data[i] = a * cx.data[i] + b * cy.data[i];
    }
    CHECK(approx_equal(lhs, rhs, 1e-12));
}

TEST_CASE("distribution padding runs through the pad-then-convolve path") {
    const FeatureMap c(6, 6, 1, 2.0);
    const FeatureMap out =
        conv2d(c, ones_kernel(1, 1, 3), conv_layer(PadMode::distribution));
    // constant map: the resized ring is constant too, so every window sums 9c
    for (double v : out.data) CHECK(v == doctest::Approx(18.0).epsilon(1e-13));

    const FeatureMap r = random_map(6, 6, 1, 23);
    const FeatureMap padded = distribution_pad(r, PadAmounts{1, 1, 1, 1});
    const FeatureMap via_layer = conv2d(r, ones_kernel(1, 1, 3), conv_layer(PadMode::distribution));
    const FeatureMap direct = conv2d(padded, ones_kernel(1, 1, 3),
                                     LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::valid_pad()));
    CHECK(via_layer.data == direct.data);
}

TEST_CASE("strided dilated conv against hand-computed taps") {
    // 6x6 input, k=3 d=2 s=2, valid padding: taps at {0,2,4}
    FeatureMap in(6, 6, 1);
    for (int i = 0; i < 36; ++i) in.data[i] = i;
    LayerSpec l = LayerSpec::conv2d(1, 1, 3, 2, PaddingSpec::valid_pad());
    l.dilation_h = l.dilation_w = 2;
    const FeatureMap out = conv2d(in, ones_kernel(1, 1, 3), l);
    REQUIRE(out.height == 1);
    REQUIRE(out.width == 1);
    double want = 0.0;
    for (int y : {0, 2, 4}) {
        for (int x : {0, 2, 4}) want += in.at(0, y, x);
    }
    CHECK(out.at(0, 0, 0) == want);
}
