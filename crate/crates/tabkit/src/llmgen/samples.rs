//! Canned assistant replies for offline demos and transport-free tests.
//!
//! Shaped like real model output: a sentence of preamble, then the table.
//! One uses aligned columns with thousands separators, the other a markdown
//! pipe table — together they cover both parser layouts.

/// 10×4 carbon-emissions table, aligned columns, comma-grouped numbers.
pub const CARBON_EMISSIONS_REPLY: &str = "\
Here is a synthetic dataset on national carbon emissions:

Country  Year  CO2 Emissions (kt)  CO2 Emissions per capita (metric tons)
USA      2010  5,395,532           17.6
China    2010  8,286,892           6.2
India    2010  1,708,505           1.4
Russia   2010  1,677,115           11.8
Japan    2010  1,155,554           9.1
Germany  2010  798,565             9.9
Canada   2010  541,020             15.9
UK       2010  491,324             7.9
Brazil   2010  422,598             2.2
France   2010  365,666             5.6
";

/// 10×4 GDP-vs-happiness table as a markdown pipe table.
pub const GDP_HAPPINESS_REPLY: &str = "\
Sure! Below is a synthetic dataset correlating happiness with GDP:

| Country | Happiness Rank | Happiness Score | GDP per Capita |
| --- | --- | --- | --- |
| Norway | 1 | 7.537 | 1.616463 |
| Denmark | 2 | 7.522 | 1.482383 |
| Iceland | 3 | 7.504 | 1.480633 |
| Switzerland | 4 | 7.494 | 1.56498 |
| Finland | 5 | 7.469 | 1.443572 |
| Netherlands | 6 | 7.377 | 1.503945 |
| Canada | 7 | 7.316 | 1.479204 |
| New Zealand | 8 | 7.314 | 1.405706 |
| Sweden | 9 | 7.284 | 1.494387 |
| Australia | 10 | 7.284 | 1.484415 |
";
