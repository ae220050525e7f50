#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "padlens/convarith.hpp"
#include "test_support.hpp"

using namespace padlens;
using namespace padlens::testing;

namespace {

LayerSpec strided_conv(int k, int s, int p) {
    return LayerSpec::conv2d(1, 1, k, s, PaddingSpec::explicit_pad(PadMode::zero, p));
}

std::vector<int> downsampling_heights(const EvenPaddingAudit& audit) {
    std::vector<int> hs;
    for (const auto& b : audit.layers) hs.push_back(b.out.h);
    return hs;
}

}  // namespace

TEST_CASE("output_shape examples") {
    CHECK(output_shape(strided_conv(3, 2, 1), {224, 224}).h == 112);
    CHECK(output_shape(strided_conv(3, 2, 1), {225, 225}).h == 113);
    CHECK(output_shape(LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::valid_pad()), {5, 5}).h == 3);
    CHECK_THROWS_AS(
        output_shape(LayerSpec::conv2d(1, 1, 7, 1, PaddingSpec::valid_pad()), {5, 5}),
        std::invalid_argument);
}

TEST_CASE("dilated output shape uses the effective kernel") {
    LayerSpec l = LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::valid_pad());
    l.dilation_h = l.dilation_w = 2;  // effective 5
    CHECK(output_shape(l, {9, 9}).h == 5);
}

TEST_CASE("consumed_extent examples") {
    CHECK(consumed_extent(112, 2, 3) == 225);  // padded 226, one pixel unconsumed
    CHECK(consumed_extent(113, 2, 3) == 227);  // equals 225 + 2: even
    CHECK(consumed_extent(1, 1, 1) == 1);
    CHECK(consumed_extent(5, 2, 3, 2) == 13);  // dilation widens the window
}

TEST_CASE("same resolution on strided layers") {
    LayerSpec l = LayerSpec::conv2d(1, 1, 3, 2, PaddingSpec::same_pad(PadMode::zero));
    // 224: total 1, extra pixel on bottom/right
    CHECK(resolve_amounts(l, 224, 224) == PadAmounts{0, 1, 0, 1});
    // 225: total 2, split evenly
    CHECK(resolve_amounts(l, 225, 225) == PadAmounts{1, 1, 1, 1});
    // full mode derives amounts from the effective kernel
    LayerSpec f = LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec{PadMode::full_zero, false, {}});
    CHECK(resolve_amounts(f, 10, 10) == PadAmounts{2, 2, 2, 2});
}

TEST_CASE("resnet skeleton is even at 225 with the expected chain") {
    const NetworkSpec spec = preset("resnet18_skeleton");
    const EvenPaddingAudit audit = check_even_padding(spec, {225, 225});
    CHECK(audit.all_even);
    CHECK(downsampling_heights(audit) == std::vector<int>{113, 57, 29, 15, 8});
    for (const auto& b : audit.layers) {
        CHECK(b.even_h);
        CHECK(b.even_w);
        CHECK(b.unconsumed_h == 0);
    }
}

TEST_CASE("resnet skeleton at 224 consumes padding only top/left") {
    const NetworkSpec spec = preset("resnet18_skeleton");
    const EvenPaddingAudit audit = check_even_padding(spec, {224, 224});
    CHECK_FALSE(audit.all_even);
    REQUIRE(audit.layers.size() == 5);
    for (const auto& b : audit.layers) {
        CHECK_FALSE(b.even_h);
        CHECK_FALSE(b.even_w);
        CHECK(b.unconsumed_h == 1);
        CHECK(b.consumed_top == b.applied.top);
        CHECK(b.consumed_bottom < b.applied.bottom);
        CHECK(b.consumed_left == b.applied.left);
        CHECK(b.consumed_right < b.applied.right);
        if (b.applied.top == 1) {
            // 3x3 layers: the bottom/right pad is not consumed at all
            CHECK(b.consumed_bottom == 0);
            CHECK(b.consumed_right == 0);
        }
    }
}

TEST_CASE("vgg pooling erodes at 127 but not at 224") {
    for (const char* name : {"vgg16", "vgg19"}) {
        const NetworkSpec spec = preset(name);
        const EvenPaddingAudit ok = check_even_padding(spec, {224, 224});
        CHECK(ok.all_even);
        for (const auto& b : ok.layers) CHECK_FALSE(b.eroding());

        const EvenPaddingAudit bad = check_even_padding(spec, {127, 127});
        CHECK_FALSE(bad.all_even);
        REQUIRE(bad.layers.size() == 5);
        for (const auto& b : bad.layers) {
            CHECK(b.eroding_h);
            CHECK(b.eroding_w);
            CHECK(b.unconsumed_h == 1);
        }
    }
}

TEST_CASE("dimensions are audited independently") {
    const NetworkSpec spec = preset("resnet18_skeleton");
    const EvenPaddingAudit audit = check_even_padding(spec, {225, 224});
    for (const auto& b : audit.layers) {
        CHECK(b.even_h);
        CHECK_FALSE(b.even_w);
    }
    CHECK_FALSE(audit.all_even);
}

TEST_CASE("admissible sizes land on stride-32 increments") {
    CHECK(admissible_sizes(preset("resnet18_skeleton"), 190, 260) ==
          std::vector<int>{193, 225, 257});
    CHECK(admissible_sizes(preset("mobilenetv1_skeleton"), 190, 260) ==
          std::vector<int>{193, 225, 257});
    CHECK(admissible_sizes(preset("vgg19"), 190, 260) ==
          std::vector<int>{192, 224, 256});
    CHECK(admissible_sizes(preset("vgg19"), 260, 190).empty());
}

TEST_CASE("every size is admissible without downsampling layers") {
    NetworkSpec spec;
    spec.input_channels = 1;
    spec.layers.push_back(LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::same_pad(PadMode::zero)));
    spec.layers.push_back(LayerSpec::relu());
    spec.validate();
    const std::vector<int> sizes = admissible_sizes(spec, 5, 14);
    CHECK(sizes == std::vector<int>{5, 6, 7, 8, 9, 10, 11, 12, 13, 14});
}

TEST_CASE("suggest_size examples") {
    const NetworkSpec resnet = preset("resnet18_skeleton");
    const SizeSuggestion s = suggest_size(resnet, 224);
    CHECK(s.nearest_le == 193);
    CHECK(s.nearest_ge == 225);
    CHECK(s.pad_to() == 225);
    CHECK_FALSE(s.admissible());

    const SizeSuggestion ok = suggest_size(resnet, 225);
    CHECK(ok.admissible());
    CHECK(ok.nearest_le == 225);
    CHECK(ok.nearest_ge == 225);

    const SizeSuggestion vgg = suggest_size(preset("vgg19"), 127);
    CHECK(vgg.nearest_le == 96);
    CHECK(vgg.nearest_ge == 128);
}

TEST_CASE("recurrence closure for the resnet family") {
    const NetworkSpec spec = preset("resnet18_skeleton");
    for (int hd = 2; hd <= 9; ++hd) {
        // iterate h_{i-1} = s (h_i - 1) + k - 2p = 2 h_i - 1 upward
        long long h = hd;
        for (int i = 0; i < 5; ++i) h = 2 * h - 1;
        CHECK(h == 32 * (hd - 1) + 1);
        const EvenPaddingAudit audit =
            check_even_padding(spec, {static_cast<int>(h), static_cast<int>(h)});
        CHECK(audit.all_even);
        CHECK(audit.layers.back().out.h == hd);
    }
}

TEST_CASE("inversion consistency") {
    // consumed <= padded, equality exactly when the report is even
    for (int k : {2, 3, 5}) {
        for (int s : {1, 2, 3}) {
            for (int p : {0, 1, 2}) {
                for (int in = 5; in <= 40; ++in) {
                    NetworkSpec spec;
                    spec.input_channels = 1;
                    spec.layers.push_back(
                        LayerSpec::conv2d(1, 1, k, s, PaddingSpec::explicit_pad(PadMode::zero, p)));
                    spec.validate();
                    EvenPaddingAudit audit;
                    try {
                        audit = check_even_padding(spec, {in, in});
                    } catch (const std::invalid_argument&) {
                        continue;
                    }
                    if (audit.layers.empty()) continue;  // stride 1: not downsampling
                    const LayerBalance& b = audit.layers[0];
                    CHECK(b.consumed_h <= b.padded_h);
                    CHECK(b.unconsumed_h < s);
                    CHECK((b.consumed_h == b.padded_h) == b.even_h);
                }
            }
        }
    }
}

TEST_CASE("admissible sizes and the audit agree on the whole range") {
    const NetworkSpec spec = preset("vgg16");
    const std::vector<int> sizes = admissible_sizes(spec, 33, 100);
    for (int n = 33; n <= 100; ++n) {
        const bool listed = std::find(sizes.begin(), sizes.end(), n) != sizes.end();
        const EvenPaddingAudit audit = check_even_padding(spec, {n, n});
        CHECK(audit.all_even == listed);
        if (!listed) {
            bool any_bad = false;
            for (const auto& b : audit.layers) any_bad |= !b.even() || b.eroding();
            CHECK(any_bad);
        }
    }
}

TEST_CASE("shape collapse reports the layer index") {
    NetworkSpec spec;
    spec.input_channels = 1;
    spec.layers.push_back(LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::valid_pad()));
    spec.layers.push_back(LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::valid_pad()));
    spec.validate();
    try {
        check_even_padding(spec, {4, 4});
        FAIL("expected collapse");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("add_from with a mismatched source shape is rejected") {
    NetworkSpec spec;
    spec.input_channels = 1;
    spec.layers.push_back(LayerSpec::conv2d(1, 1, 3, 1, PaddingSpec::same_pad(PadMode::zero)));
    spec.layers.push_back(LayerSpec::conv2d(1, 1, 3, 2, PaddingSpec::same_pad(PadMode::zero)));
    spec.layers.push_back(LayerSpec::add(0));  // halved extent vs layer 0
    spec.validate();
    try {
        check_even_padding(spec, {16, 16});
        FAIL("expected shape mismatch");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("layer 2") != std::string::npos);
        CHECK(msg.find("add_from") != std::string::npos);
    }
}

TEST_CASE("audit json carries the per-layer records") {
    const EvenPaddingAudit audit =
        check_even_padding(preset("resnet18_skeleton"), {224, 224});
    const nlohmann::json j = audit_to_json(audit);
    CHECK(j["all_even"] == false);
    CHECK(j["downsampling_layers"].size() == 5);
    CHECK(j["downsampling_layers"][0]["pad_consumed"][0] == 3);
    CHECK(j["downsampling_layers"][0]["pad_consumed"][1] == 2);
    CHECK(j["shape_trace"].size() == audit.trace.size());
}
