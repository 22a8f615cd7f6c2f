#pragma once

#include "gpprobe/kernels.h"

namespace gpprobe::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(GPPROBE_WITH_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace gpprobe::kernels::detail
