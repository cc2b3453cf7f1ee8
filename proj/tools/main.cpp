// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "app/app.hpp"

int main(int argc, char** argv) { return apirec::app::run(argc, argv, std::cout, std::cerr); }
