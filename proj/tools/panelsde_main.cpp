#include "panelsde/cli.hpp"

int main(int argc, char** argv) {
    return panelsde::cli::run(argc, argv);
}
