// Benchmark mesh generator: jittered unit-square triangulations, the
// quarter-cylinder ridge, cylinder patches, and a wavy test shell.
#include <iostream>

#include <CLI11.hpp>

#include "rayflow/meshgen.hpp"

using namespace rayflow;

int main(int argc, char** argv) {
  CLI::App app{"benchmark mesh generator"};
  app.set_help_flag("--help", "print help");  // frees -h for the spacing flag
  app.require_subcommand(1);

  std::string out;
  double h = 0.1, jitter = 0.25, ridge_jitter = 0.0;
  double radius = 2.0 / (3.0 * kPi), amp = 0.08;
  int n = 16;
  std::uint64_t seed = 1;

  auto* square = app.add_subcommand("square", "triangulated unit square");
  square->add_option("--h", h, "nominal spacing")->required();
  square->add_option("--jitter", jitter, "interior node jitter fraction of h");
  square->add_option("--seed", seed);
  square->add_option("-o,--out", out)->required();

  auto* ridge = app.add_subcommand("ridge", "quarter-cylinder ridge surface");
  ridge->add_option("--h", h)->required();
  ridge->add_option("--jitter", ridge_jitter, "interior jitter (seams stay straight)");
  ridge->add_option("--seed", seed);
  ridge->add_option("-o,--out", out)->required();

  auto* cyl = app.add_subcommand("cylinder", "quarter-cylinder patch");
  cyl->add_option("--radius", radius);
  cyl->add_option("--h", h)->required();
  cyl->add_option("-o,--out", out)->required();

  auto* wavy = app.add_subcommand("wavy", "doubly curved test shell");
  wavy->add_option("--n", n, "grid resolution (2 n^2 cells)");
  wavy->add_option("--amp", amp, "height amplitude");
  wavy->add_option("-o,--out", out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    TriMesh mesh;
    if (square->parsed()) mesh = square_tri_mesh(h, jitter, seed);
    if (ridge->parsed()) mesh = ridge_tri_mesh(h, ridge_jitter, seed);
    if (cyl->parsed()) mesh = cylinder_patch_mesh(radius, h);
    if (wavy->parsed()) mesh = wavy_shell_mesh(n, amp);
    write_mesh(mesh, out);
    std::cout << "wrote " << out << " (" << mesh.nodes.size() << " nodes, "
              << mesh.tris.size() << " tris)\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
