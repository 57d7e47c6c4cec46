// cyclored: census, density, entangle, galois and constants subcommands.

#include <iostream>

#include "CLI11.hpp"
#include "cyclored/app.hpp"

using namespace cyclored;

namespace {

void add_curve_options(CLI::App* cmd, CurveChoice& c) {
   cmd->add_option("--label", c.label, "registry label (serre-ex1 ... serre-ex5)");
   cmd->add_option("--a", c.A, "Weierstrass coefficient A");
   cmd->add_option("--b", c.B, "Weierstrass coefficient B");
}

}  // namespace

int main(int argc, char** argv) {
   CLI::App app{"Primes of cyclic reduction: census, densities and entanglement"};
   app.require_subcommand(1);

   CensusOptions census;
   auto* c = app.add_subcommand("census", "classify every prime p <= limit");
   add_curve_options(c, census.curve);
   c->add_option("--limit", census.limit, "prime bound x")->capture_default_str();
   c->add_option("--workers", census.workers, "worker threads (0: all cores)")->capture_default_str();
   c->add_option("--chunk-size", census.chunk_size, "primes per chunk")->capture_default_str();
   c->add_option("--checkpoint", census.checkpoint, "append-only checkpoint file for resume");
   c->add_option("--output,-o", census.output, "report file (default: stdout)");
   c->add_option("--csv", census.classification_csv, "per-prime classification CSV");
   c->add_option("--running-csv", census.running_csv, "running cyclic fraction CSV");

   DensityOptions density;
   auto* d = app.add_subcommand("density", "exact density report for a degree profile");
   d->add_option("--label", density.label, "registry label");
   d->add_option("--profile", density.profile, "profile JSON file");
   d->add_option("--L", density.truncation, "Euler product truncation")->capture_default_str();
   d->add_option("--charsum", density.charsum, "override the charsum primes")->delimiter(',');
   d->add_option("--superfluous", density.superfluous, "override the superfluous primes")->delimiter(',');
   d->add_flag("--from-fixtures", density.from_fixtures, "take degrees from the fixture directory");
   d->add_option("--fixtures", density.fixture_dir, "fixture directory (default: $CYCLORED_FIXTURES)");
   d->add_option("--output,-o", density.output, "report file (default: stdout)");

   EntangleOptions entangle;
   auto* e = app.add_subcommand("entangle", "exact densities of an explicit matrix group");
   e->add_option("input", entangle.input, "group description JSON")->required();
   e->add_option("--output,-o", entangle.output, "report file (default: stdout)");

   GaloisOptions galois;
   auto* g = app.add_subcommand("galois", "2-division degree and surjectivity witnesses");
   add_curve_options(g, galois.curve);
   g->add_option("--ell", galois.ells, "primes to test")->delimiter(',')->capture_default_str();
   g->add_option("--samples", galois.sample_bound, "prime bound for sampling")->capture_default_str();
   g->add_option("--output,-o", galois.output, "report file (default: stdout)");

   ConstantsOptions constants;
   auto* k = app.add_subcommand("constants", "enclosure of the elliptic Artin constant");
   k->add_option("--L", constants.truncation, "Euler product truncation")->capture_default_str();
   k->add_option("--output,-o", constants.output, "report file (default: stdout)");

   try {
      app.parse(argc, argv);
   } catch(const CLI::ParseError& err) {
      const int rc = app.exit(err);
      return rc == 0 ? exit_ok : exit_usage;
   }

   if(*c) {
      return cli_census(census, std::cout, std::cerr);
   }
   if(*d) {
      return cli_density(density, std::cout, std::cerr);
   }
   if(*e) {
      return cli_entangle(entangle, std::cout, std::cerr);
   }
   if(*g) {
      return cli_galois(galois, std::cout, std::cerr);
   }
   return cli_constants(constants, std::cout, std::cerr);
}
