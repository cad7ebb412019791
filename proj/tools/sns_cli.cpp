// sns_cli: runs one experiment and writes its manifest, results and plots.

#include "sns/cli_report.hpp"

int main(int argc, char** argv) { return sns::run(argc, argv); }
