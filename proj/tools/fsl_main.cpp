#include "fsl/cli.hpp"

int main(int argc, char** argv) {
    return fsl::cli::dispatch(argc, argv);
}
