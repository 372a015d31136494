#pragma once

#define TMD_VERSION "0.1.0"
