# Tests package for pivq
