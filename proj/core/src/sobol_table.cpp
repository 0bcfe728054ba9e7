#include "dbdp/sampling.hpp"

#include <iterator>

namespace dbdp {

namespace {

// Primitive polynomials and initial direction integers for dimensions
// 2..160, Joe-Kuo style. Same content as core/data/sobol_direction_numbers.txt.
struct TableEntry {
    std::uint32_t degree;
    std::uint32_t poly;
    std::uint32_t m[10];
};

constexpr TableEntry kJoeKuoEntries[] = {
    {1u, 0u, {1u, 0u, 0u, 0u, 0u, 0u, 0u, 0u, 0u, 0u}},
    {2u, 1u, {1u, 3u, 0u, 0u, 0u, 0u, 0u, 0u, 0u, 0u}},
    {3u, 1u, {1u, 3u, 1u, 0u, 0u, 0u, 0u, 0u, 0u, 0u}},
    {3u, 2u, {1u, 1u, 1u, 0u, 0u, 0u, 0u, 0u, 0u, 0u}},
    {4u, 1u, {1u, 1u, 3u, 3u, 0u, 0u, 0u, 0u, 0u, 0u}},
    {4u, 4u, {1u, 3u, 5u, 13u, 0u, 0u, 0u, 0u, 0u, 0u}},
    {5u, 2u, {1u, 1u, 5u, 5u, 17u, 0u, 0u, 0u, 0u, 0u}},
    {5u, 4u, {1u, 1u, 5u, 5u, 5u, 0u, 0u, 0u, 0u, 0u}},
    {5u, 7u, {1u, 1u, 7u, 11u, 19u, 0u, 0u, 0u, 0u, 0u}},
    {5u, 11u, {1u, 1u, 5u, 1u, 1u, 0u, 0u, 0u, 0u, 0u}},
    {5u, 13u, {1u, 1u, 1u, 3u, 11u, 0u, 0u, 0u, 0u, 0u}},
    {5u, 14u, {1u, 3u, 5u, 5u, 31u, 0u, 0u, 0u, 0u, 0u}},
    {6u, 1u, {1u, 3u, 3u, 9u, 7u, 49u, 0u, 0u, 0u, 0u}},
    {6u, 13u, {1u, 1u, 1u, 15u, 21u, 21u, 0u, 0u, 0u, 0u}},
    {6u, 16u, {1u, 3u, 1u, 13u, 27u, 49u, 0u, 0u, 0u, 0u}},
    {6u, 19u, {1u, 1u, 1u, 15u, 7u, 5u, 0u, 0u, 0u, 0u}},
    {6u, 22u, {1u, 3u, 1u, 15u, 13u, 25u, 0u, 0u, 0u, 0u}},
    {6u, 25u, {1u, 1u, 5u, 5u, 19u, 61u, 0u, 0u, 0u, 0u}},
    {7u, 1u, {1u, 3u, 7u, 11u, 23u, 15u, 103u, 0u, 0u, 0u}},
    {7u, 4u, {1u, 3u, 7u, 13u, 13u, 15u, 69u, 0u, 0u, 0u}},
    {7u, 7u, {1u, 1u, 3u, 13u, 7u, 35u, 63u, 0u, 0u, 0u}},
    {7u, 8u, {1u, 3u, 5u, 9u, 1u, 25u, 53u, 0u, 0u, 0u}},
    {7u, 14u, {1u, 3u, 1u, 13u, 9u, 35u, 107u, 0u, 0u, 0u}},
    {7u, 19u, {1u, 3u, 1u, 5u, 27u, 61u, 31u, 0u, 0u, 0u}},
    {7u, 21u, {1u, 1u, 5u, 11u, 19u, 41u, 61u, 0u, 0u, 0u}},
    {7u, 28u, {1u, 3u, 5u, 3u, 3u, 13u, 69u, 0u, 0u, 0u}},
    {7u, 31u, {1u, 1u, 7u, 13u, 1u, 19u, 1u, 0u, 0u, 0u}},
    {7u, 32u, {1u, 3u, 7u, 5u, 13u, 19u, 59u, 0u, 0u, 0u}},
    {7u, 37u, {1u, 1u, 3u, 9u, 25u, 29u, 41u, 0u, 0u, 0u}},
    {7u, 41u, {1u, 3u, 5u, 13u, 23u, 1u, 55u, 0u, 0u, 0u}},
    {7u, 42u, {1u, 3u, 7u, 3u, 13u, 59u, 17u, 0u, 0u, 0u}},
    {7u, 50u, {1u, 3u, 1u, 3u, 5u, 53u, 69u, 0u, 0u, 0u}},
    {7u, 55u, {1u, 1u, 5u, 5u, 23u, 33u, 13u, 0u, 0u, 0u}},
    {7u, 56u, {1u, 1u, 7u, 7u, 1u, 61u, 123u, 0u, 0u, 0u}},
    {7u, 59u, {1u, 1u, 7u, 9u, 13u, 61u, 49u, 0u, 0u, 0u}},
    {7u, 62u, {1u, 3u, 3u, 5u, 3u, 55u, 33u, 0u, 0u, 0u}},
    {8u, 14u, {1u, 3u, 1u, 15u, 31u, 13u, 49u, 245u, 0u, 0u}},
    {8u, 21u, {1u, 3u, 5u, 15u, 31u, 59u, 63u, 97u, 0u, 0u}},
    {8u, 22u, {1u, 3u, 1u, 11u, 11u, 11u, 77u, 249u, 0u, 0u}},
    {8u, 38u, {1u, 3u, 1u, 11u, 27u, 43u, 71u, 9u, 0u, 0u}},
    {8u, 47u, {1u, 1u, 7u, 15u, 21u, 11u, 81u, 45u, 0u, 0u}},
    {8u, 49u, {1u, 3u, 7u, 3u, 25u, 31u, 65u, 79u, 0u, 0u}},
    {8u, 50u, {1u, 3u, 1u, 1u, 19u, 11u, 3u, 205u, 0u, 0u}},
    {8u, 52u, {1u, 1u, 5u, 9u, 19u, 21u, 29u, 157u, 0u, 0u}},
    {8u, 56u, {1u, 3u, 7u, 11u, 1u, 33u, 89u, 185u, 0u, 0u}},
    {8u, 67u, {1u, 3u, 3u, 3u, 15u, 9u, 79u, 71u, 0u, 0u}},
    {8u, 70u, {1u, 3u, 7u, 11u, 15u, 39u, 119u, 27u, 0u, 0u}},
    {8u, 84u, {1u, 1u, 3u, 1u, 11u, 31u, 97u, 225u, 0u, 0u}},
    {8u, 97u, {1u, 1u, 1u, 3u, 23u, 43u, 57u, 177u, 0u, 0u}},
    {8u, 103u, {1u, 3u, 7u, 7u, 17u, 17u, 37u, 71u, 0u, 0u}},
    {8u, 115u, {1u, 3u, 1u, 5u, 27u, 63u, 123u, 213u, 0u, 0u}},
    {8u, 122u, {1u, 1u, 3u, 5u, 11u, 43u, 53u, 133u, 0u, 0u}},
    {9u, 8u, {1u, 3u, 5u, 5u, 29u, 17u, 47u, 173u, 479u, 0u}},
    {9u, 13u, {1u, 3u, 3u, 11u, 3u, 1u, 109u, 9u, 69u, 0u}},
    {9u, 16u, {1u, 1u, 1u, 5u, 17u, 39u, 23u, 5u, 343u, 0u}},
    {9u, 22u, {1u, 3u, 1u, 5u, 25u, 15u, 31u, 103u, 499u, 0u}},
    {9u, 25u, {1u, 1u, 1u, 11u, 11u, 17u, 63u, 105u, 183u, 0u}},
    {9u, 44u, {1u, 1u, 5u, 11u, 9u, 29u, 97u, 231u, 363u, 0u}},
    {9u, 47u, {1u, 1u, 5u, 15u, 19u, 45u, 41u, 7u, 383u, 0u}},
    {9u, 52u, {1u, 3u, 7u, 7u, 31u, 19u, 83u, 137u, 221u, 0u}},
    {9u, 55u, {1u, 1u, 1u, 3u, 23u, 15u, 111u, 223u, 83u, 0u}},
    {9u, 59u, {1u, 1u, 5u, 13u, 31u, 15u, 55u, 25u, 161u, 0u}},
    {9u, 62u, {1u, 1u, 3u, 13u, 25u, 47u, 39u, 87u, 257u, 0u}},
    {9u, 67u, {1u, 1u, 1u, 11u, 21u, 53u, 125u, 249u, 293u, 0u}},
    {9u, 74u, {1u, 1u, 7u, 11u, 11u, 7u, 57u, 79u, 323u, 0u}},
    {9u, 81u, {1u, 1u, 5u, 5u, 17u, 13u, 81u, 3u, 131u, 0u}},
    {9u, 82u, {1u, 1u, 7u, 13u, 23u, 7u, 65u, 251u, 475u, 0u}},
    {9u, 87u, {1u, 3u, 5u, 1u, 9u, 43u, 3u, 149u, 11u, 0u}},
    {9u, 91u, {1u, 1u, 3u, 13u, 31u, 13u, 13u, 255u, 487u, 0u}},
    {9u, 94u, {1u, 3u, 3u, 1u, 5u, 63u, 89u, 91u, 127u, 0u}},
    {9u, 103u, {1u, 1u, 3u, 3u, 1u, 19u, 123u, 127u, 237u, 0u}},
    {9u, 104u, {1u, 1u, 5u, 7u, 23u, 31u, 37u, 243u, 289u, 0u}},
    {9u, 109u, {1u, 1u, 5u, 11u, 17u, 53u, 117u, 183u, 491u, 0u}},
    {9u, 122u, {1u, 1u, 1u, 5u, 1u, 13u, 13u, 209u, 345u, 0u}},
    {9u, 124u, {1u, 1u, 3u, 15u, 1u, 57u, 115u, 7u, 33u, 0u}},
    {9u, 137u, {1u, 3u, 1u, 11u, 7u, 43u, 81u, 207u, 175u, 0u}},
    {9u, 138u, {1u, 3u, 1u, 1u, 15u, 27u, 63u, 255u, 49u, 0u}},
    {9u, 143u, {1u, 3u, 5u, 3u, 27u, 61u, 105u, 171u, 305u, 0u}},
    {9u, 145u, {1u, 1u, 5u, 3u, 1u, 3u, 57u, 249u, 149u, 0u}},
    {9u, 152u, {1u, 1u, 3u, 5u, 5u, 57u, 15u, 13u, 159u, 0u}},
    {9u, 157u, {1u, 1u, 1u, 11u, 7u, 11u, 105u, 141u, 225u, 0u}},
    {9u, 167u, {1u, 3u, 3u, 5u, 27u, 59u, 121u, 101u, 271u, 0u}},
    {9u, 173u, {1u, 3u, 5u, 9u, 11u, 49u, 51u, 59u, 115u, 0u}},
    {9u, 176u, {1u, 1u, 7u, 1u, 23u, 45u, 125u, 71u, 419u, 0u}},
    {9u, 181u, {1u, 1u, 3u, 5u, 23u, 5u, 105u, 109u, 75u, 0u}},
    {9u, 182u, {1u, 1u, 7u, 15u, 7u, 11u, 67u, 121u, 453u, 0u}},
    {9u, 185u, {1u, 3u, 7u, 3u, 9u, 13u, 31u, 27u, 449u, 0u}},
    {9u, 191u, {1u, 3u, 1u, 15u, 19u, 39u, 39u, 89u, 15u, 0u}},
    {9u, 194u, {1u, 1u, 1u, 1u, 1u, 33u, 73u, 145u, 379u, 0u}},
    {9u, 199u, {1u, 3u, 1u, 15u, 15u, 43u, 29u, 13u, 483u, 0u}},
    {9u, 218u, {1u, 1u, 7u, 3u, 19u, 27u, 85u, 131u, 431u, 0u}},
    {9u, 220u, {1u, 3u, 3u, 3u, 5u, 35u, 23u, 195u, 349u, 0u}},
    {9u, 227u, {1u, 3u, 3u, 7u, 9u, 27u, 39u, 59u, 297u, 0u}},
    {9u, 229u, {1u, 1u, 3u, 9u, 11u, 17u, 13u, 241u, 157u, 0u}},
    {9u, 230u, {1u, 3u, 7u, 15u, 25u, 57u, 33u, 189u, 213u, 0u}},
    {9u, 234u, {1u, 1u, 7u, 1u, 9u, 55u, 73u, 83u, 217u, 0u}},
    {9u, 236u, {1u, 3u, 3u, 13u, 19u, 27u, 23u, 113u, 249u, 0u}},
    {9u, 241u, {1u, 3u, 5u, 3u, 23u, 43u, 3u, 253u, 479u, 0u}},
    {9u, 244u, {1u, 1u, 5u, 5u, 11u, 5u, 45u, 117u, 217u, 0u}},
    {9u, 253u, {1u, 3u, 3u, 7u, 29u, 37u, 33u, 123u, 147u, 0u}},
    {10u, 4u, {1u, 3u, 1u, 15u, 5u, 5u, 37u, 227u, 223u, 459u}},
    {10u, 13u, {1u, 1u, 7u, 5u, 5u, 39u, 63u, 255u, 135u, 487u}},
    {10u, 19u, {1u, 3u, 1u, 7u, 9u, 7u, 87u, 249u, 217u, 599u}},
    {10u, 22u, {1u, 1u, 3u, 13u, 9u, 47u, 7u, 225u, 363u, 247u}},
    {10u, 50u, {1u, 3u, 7u, 13u, 19u, 13u, 9u, 67u, 9u, 737u}},
    {10u, 55u, {1u, 3u, 5u, 5u, 19u, 59u, 7u, 41u, 319u, 677u}},
    {10u, 64u, {1u, 1u, 5u, 3u, 31u, 63u, 15u, 43u, 207u, 789u}},
    {10u, 69u, {1u, 1u, 7u, 9u, 13u, 39u, 3u, 47u, 497u, 169u}},
    {10u, 98u, {1u, 3u, 1u, 7u, 21u, 17u, 97u, 19u, 415u, 905u}},
    {10u, 107u, {1u, 3u, 7u, 1u, 3u, 31u, 71u, 111u, 165u, 127u}},
    {10u, 115u, {1u, 1u, 5u, 11u, 1u, 61u, 83u, 119u, 203u, 847u}},
    {10u, 121u, {1u, 3u, 3u, 13u, 9u, 61u, 19u, 97u, 47u, 35u}},
    {10u, 127u, {1u, 1u, 7u, 7u, 15u, 29u, 63u, 95u, 417u, 469u}},
    {10u, 134u, {1u, 3u, 1u, 9u, 25u, 9u, 71u, 57u, 213u, 385u}},
    {10u, 140u, {1u, 3u, 5u, 13u, 31u, 47u, 101u, 57u, 39u, 341u}},
    {10u, 145u, {1u, 1u, 3u, 3u, 31u, 57u, 125u, 173u, 365u, 551u}},
    {10u, 152u, {1u, 3u, 7u, 1u, 13u, 57u, 67u, 157u, 451u, 707u}},
    {10u, 158u, {1u, 1u, 1u, 7u, 21u, 13u, 105u, 89u, 429u, 965u}},
    {10u, 161u, {1u, 1u, 5u, 9u, 17u, 51u, 45u, 119u, 157u, 141u}},
    {10u, 171u, {1u, 3u, 7u, 7u, 13u, 45u, 91u, 9u, 129u, 741u}},
    {10u, 181u, {1u, 3u, 7u, 1u, 23u, 57u, 67u, 141u, 151u, 571u}},
    {10u, 194u, {1u, 1u, 3u, 11u, 17u, 47u, 93u, 107u, 375u, 157u}},
    {10u, 199u, {1u, 3u, 3u, 5u, 11u, 21u, 43u, 51u, 169u, 915u}},
    {10u, 203u, {1u, 1u, 5u, 3u, 15u, 55u, 101u, 67u, 455u, 625u}},
    {10u, 208u, {1u, 3u, 5u, 9u, 1u, 23u, 29u, 47u, 345u, 595u}},
    {10u, 227u, {1u, 3u, 7u, 7u, 5u, 49u, 29u, 155u, 323u, 589u}},
    {10u, 242u, {1u, 3u, 3u, 7u, 5u, 41u, 127u, 61u, 261u, 717u}},
    {10u, 251u, {1u, 3u, 7u, 7u, 17u, 23u, 117u, 67u, 129u, 1009u}},
    {10u, 253u, {1u, 1u, 3u, 13u, 11u, 39u, 21u, 207u, 123u, 305u}},
    {10u, 265u, {1u, 1u, 3u, 9u, 29u, 3u, 95u, 47u, 231u, 73u}},
    {10u, 266u, {1u, 3u, 1u, 9u, 1u, 29u, 117u, 21u, 441u, 259u}},
    {10u, 274u, {1u, 3u, 1u, 13u, 21u, 39u, 125u, 211u, 439u, 723u}},
    {10u, 283u, {1u, 1u, 7u, 3u, 17u, 63u, 115u, 89u, 49u, 773u}},
    {10u, 289u, {1u, 3u, 7u, 13u, 11u, 33u, 101u, 107u, 63u, 73u}},
    {10u, 295u, {1u, 1u, 5u, 5u, 13u, 57u, 63u, 135u, 437u, 177u}},
    {10u, 301u, {1u, 1u, 3u, 7u, 27u, 63u, 93u, 47u, 417u, 483u}},
    {10u, 316u, {1u, 1u, 3u, 1u, 23u, 29u, 1u, 191u, 49u, 23u}},
    {10u, 319u, {1u, 1u, 3u, 15u, 25u, 55u, 9u, 101u, 219u, 607u}},
    {10u, 324u, {1u, 3u, 1u, 7u, 7u, 19u, 51u, 251u, 393u, 307u}},
    {10u, 346u, {1u, 3u, 3u, 3u, 25u, 55u, 17u, 75u, 337u, 3u}},
    {10u, 352u, {1u, 1u, 1u, 13u, 25u, 17u, 65u, 45u, 479u, 413u}},
    {10u, 361u, {1u, 1u, 7u, 7u, 27u, 49u, 99u, 161u, 213u, 727u}},
    {10u, 367u, {1u, 3u, 5u, 1u, 23u, 5u, 43u, 41u, 251u, 857u}},
    {10u, 382u, {1u, 3u, 3u, 7u, 11u, 61u, 39u, 87u, 383u, 835u}},
    {10u, 395u, {1u, 1u, 3u, 15u, 13u, 7u, 29u, 7u, 505u, 923u}},
    {10u, 398u, {1u, 3u, 7u, 1u, 5u, 31u, 47u, 157u, 445u, 501u}},
    {10u, 400u, {1u, 1u, 3u, 7u, 1u, 43u, 9u, 147u, 115u, 605u}},
    {10u, 412u, {1u, 3u, 3u, 13u, 5u, 1u, 119u, 211u, 455u, 1001u}},
    {10u, 419u, {1u, 1u, 3u, 5u, 13u, 19u, 3u, 243u, 75u, 843u}},
    {10u, 422u, {1u, 3u, 7u, 7u, 1u, 19u, 91u, 249u, 357u, 589u}},
    {10u, 426u, {1u, 1u, 1u, 9u, 1u, 25u, 109u, 197u, 279u, 411u}},
    {10u, 428u, {1u, 3u, 1u, 15u, 23u, 57u, 59u, 135u, 191u, 75u}},
    {10u, 433u, {1u, 1u, 5u, 15u, 29u, 21u, 39u, 253u, 383u, 349u}},
    {10u, 446u, {1u, 3u, 3u, 5u, 19u, 45u, 61u, 151u, 199u, 981u}},
    {10u, 454u, {1u, 3u, 5u, 13u, 9u, 61u, 107u, 141u, 141u, 1u}},
    {10u, 457u, {1u, 3u, 1u, 11u, 27u, 25u, 85u, 105u, 309u, 979u}},
    {10u, 472u, {1u, 3u, 3u, 11u, 19u, 7u, 115u, 223u, 349u, 43u}},
    {10u, 493u, {1u, 1u, 7u, 9u, 21u, 39u, 123u, 21u, 275u, 927u}},
    {10u, 505u, {1u, 1u, 7u, 13u, 15u, 41u, 47u, 243u, 303u, 437u}},
};

} // namespace

const DirectionTable& DirectionTable::builtin() {
    static const DirectionTable table = [] {
        std::vector<Row> rows;
        rows.reserve(std::size(kJoeKuoEntries));
        for (const TableEntry& e : kJoeKuoEntries) {
            Row row;
            row.degree = e.degree;
            row.poly = e.poly;
            row.m.assign(e.m, e.m + e.degree);
            rows.push_back(std::move(row));
        }
        return DirectionTable(std::move(rows));
    }();
    return table;
}

} // namespace dbdp
