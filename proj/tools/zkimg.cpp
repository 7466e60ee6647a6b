// zkimg command-line tool: plan, prove, verify, hash, apply, bench, dump.

#include <CLI11.hpp>
#include <iostream>

#include "zkimg/cli.hpp"

int main(int argc, char** argv) {
    using namespace zkimg;

    CLI::App app{"zkimg - verifiable image transformation circuits"};
    app.require_subcommand(1);

    cli::GlobalConfig cfg;
    app.add_option("--mem-limit", cfg.mem_limit, "segment memory limit in bytes")
        ->capture_default_str();
    app.add_option("--blinding-rows", cfg.blinding_rows, "blinding rows reserved per lookup table")
        ->capture_default_str();
    app.add_option("--threads", cfg.threads,
                   "worker threads (default: ZKIMG_THREADS or all cores)");

    std::string pipeline_path, image_path, bundle_path, out_path, expect_source, name, size;
    bool json = false;

    auto* plan = app.add_subcommand("plan", "plan pipeline segments under the memory limit");
    plan->add_option("pipeline", pipeline_path, "pipeline file")->required();
    plan->add_flag("--json", json, "machine-readable JSON report");

    auto* prove = app.add_subcommand("prove", "build, check, and bundle a pipeline run");
    prove->add_option("pipeline", pipeline_path, "pipeline file")->required();
    prove->add_option("image", image_path, "input image (PPM P6)")->required();
    prove->add_option("bundle", bundle_path, "output bundle path")->required();

    auto* verify = app.add_subcommand("verify", "verify a chain bundle");
    verify->add_option("bundle", bundle_path, "bundle path")->required();
    verify->add_option("--expect-source", expect_source, "require this source digest (64 hex)");

    auto* hash = app.add_subcommand("hash", "print the digest of an image");
    hash->add_option("image", image_path, "image (PPM P6)")->required();

    auto* apply = app.add_subcommand("apply", "apply the pipeline natively (no circuits)");
    apply->add_option("pipeline", pipeline_path, "pipeline file")->required();
    apply->add_option("image", image_path, "input image (PPM P6)")->required();
    apply->add_option("output", out_path, "output image path")->required();

    auto* bench = app.add_subcommand("bench", "time one transform segment and dump its costs");
    bench->add_option("transform", name, "transform name, e.g. contrast")->required();
    bench->add_option("size", size, "image size WxH, e.g. 64x48")->required();

    auto* dump = app.add_subcommand("dump", "print a bundle summary as JSON");
    dump->add_option("bundle", bundle_path, "bundle path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : cli::exit_input;
    }

    if (plan->parsed()) return cli::cmd_plan(pipeline_path, json, cfg, std::cout, std::cerr);
    if (prove->parsed())
        return cli::cmd_prove(pipeline_path, image_path, bundle_path, cfg, std::cout, std::cerr);
    if (verify->parsed())
        return cli::cmd_verify(bundle_path, expect_source, cfg, std::cout, std::cerr);
    if (hash->parsed()) return cli::cmd_hash(image_path, std::cout, std::cerr);
    if (apply->parsed())
        return cli::cmd_apply(pipeline_path, image_path, out_path, std::cout, std::cerr);
    if (bench->parsed()) return cli::cmd_bench(name, size, cfg, std::cout, std::cerr);
    if (dump->parsed()) return cli::cmd_dump(bundle_path, std::cout, std::cerr);
    return cli::exit_input;
}
