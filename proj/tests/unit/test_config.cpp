#include <doctest.h>

#include <string>

#include "dacc/config.hpp"
#include "dacc/errors.hpp"

using namespace dacc;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const TrainConfig c = parse_config("");
    CHECK(c.arch.input_size == 512);
    CHECK(c.arch.grid == GridSpec{8, 8});
    CHECK_FALSE(c.th.has_value());
    CHECK(c.learning_rate == 1e-5);
    CHECK(c.batch_size == 4);
    CHECK(c.pretrain_epochs == 50);
    CHECK(c.finetune_epochs == 50);
    CHECK(c.lambda.dan == 1.0);
    CHECK(c.sigma_mode.sigma == 4.0);
    CHECK(c.flip_probability == 0.5);
    CHECK(c.masked_count_loss);
  }

  TEST_CASE("key = value lines with comments") {
    const auto c = parse_config(
        "# model\n"
        "input_size = 256\n"
        "grid=4x4   # coarse\n"
        "\n"
        "th = 40\n"
        "lambda_hcn = 0.5\n"
        "learning_rate = 1e-3\n"
        "finetune_learning_rate = 2e-4\n"
        "sigma_mode = adaptive\n"
        "count_loss = full\n"
        "conv_algorithm = direct\n");
    CHECK(c.arch.input_size == 256);
    CHECK(c.arch.grid == GridSpec{4, 4});
    CHECK(c.th == 40.0);
    CHECK(c.lambda.hcn == 0.5);
    CHECK(c.learning_rate == 1e-3);
    CHECK(c.finetune_lr() == 2e-4);
    CHECK(c.sigma_mode.kind == SigmaMode::Kind::geometry_adaptive);
    CHECK_FALSE(c.masked_count_loss);
    CHECK(c.arch.algorithm == ConvAlgorithm::direct);
    CHECK_FALSE(parse_config("th = auto\n").th.has_value());
    CHECK(parse_config("learning_rate = 0.01\nfinetune_learning_rate = auto\n").finetune_lr() == 0.01);
  }

  TEST_CASE("round trip through the canonical form") {
    TrainConfig c;
    c.arch.input_size = 128;
    c.arch.grid = {16, 16};
    c.th = 2.5;
    c.lambda = {0.1, 0.2, 0.3};
    c.learning_rate = 3e-4;
    c.finetune_learning_rate = 5e-5;
    c.seed = 77;
    c.sigma_mode = SigmaMode::adaptive(5, 0.25, 1.5);
    const auto text = format_config(c);
    CHECK(format_config(parse_config(text)) == text);
  }

  TEST_CASE("rejections name the line") {
    CHECK(error_of("seed = 1\nfoo = 2\n").find("line 2: unknown key 'foo'") != std::string::npos);
    CHECK(error_of("seed = 1\nseed = 2\n").find("duplicate") != std::string::npos);
    CHECK(error_of("seed\n").find("line 1") != std::string::npos);
    CHECK(error_of("seed = -1\n").find("line 1") != std::string::npos);
    CHECK(error_of("learning_rate = fast\n").find("line 1") != std::string::npos);
    CHECK(error_of("learning_rate = 0\n").find("learning_rate") != std::string::npos);
    CHECK(error_of("finetune_learning_rate = -1\n").find("finetune_learning_rate") != std::string::npos);
    CHECK(error_of("grid = 8\n").find("grid") != std::string::npos);
    CHECK_FALSE(error_of("input_size = 500\n").empty());
    CHECK_FALSE(error_of("th = -1\n").empty());
    CHECK_FALSE(error_of("lambda_dan = -0.5\n").empty());
    CHECK_FALSE(error_of("sigma_mode = magic\n").empty());
    CHECK_FALSE(error_of("batch_size = 0\n").empty());
    CHECK_FALSE(error_of("flip_probability = 1.5\n").empty());
    CHECK_FALSE(error_of("seed =\n").empty());
  }

  TEST_CASE("grid parsing") {
    CHECK(parse_grid("8x8") == GridSpec{8, 8});
    CHECK(parse_grid("16x4") == GridSpec{16, 4});
    CHECK_THROWS_AS(parse_grid("8"), ValidationError);
    CHECK_THROWS_AS(parse_grid("0x8"), ValidationError);
    CHECK_THROWS_AS(parse_grid("axb"), ValidationError);
  }
}
