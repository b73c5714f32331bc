// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

// Writes the synthetic demo workcell used by the tests and the README.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "error.hpp"
#include "fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"splatrig_fixture: write a synthetic demo workcell"};
  std::string dir;
  splatrig::fixture::WorkcellOptions options;
  app.add_option("dir", dir, "output directory")->required();
  app.add_option("--states", options.states, "trajectory states")->check(CLI::PositiveNumber);
  app.add_option("--size", options.image_size, "frame width and height in pixels")->check(CLI::Range(16, 4096));
  app.add_option("--seed", options.seed, "sampling seed");
  CLI11_PARSE(app, argc, argv);
  try {
    splatrig::fixture::write_workcell(dir, options);
  } catch (const splatrig::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", splatrig::error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  std::printf("wrote workcell to %s\n", dir.c_str());
  return 0;
}
