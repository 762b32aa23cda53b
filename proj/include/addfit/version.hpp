#pragma once

#define ADDFIT_VERSION "0.1.0"
