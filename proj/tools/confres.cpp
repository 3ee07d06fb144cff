#include "confres/cli.hpp"

int main(int argc, char** argv) {
    return confres::cli::run(argc, argv);
}
