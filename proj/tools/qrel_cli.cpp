#include "qrel/cli.hpp"

int main(int argc, char** argv) {
    return qrel::run_cli(argc, argv);
}
