#include "qmbs/blas_guard.hpp"
#include "qmbs/cli.hpp"

int main(int argc, char** argv) {
  qmbs::ensure_working_blas(argv);
  return qmbs::cli::main_entry(argc, argv);
}
