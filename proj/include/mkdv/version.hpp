#ifndef MKDV_VERSION_HPP
#define MKDV_VERSION_HPP

#define MKDV_VERSION "1.0.0"

#endif
