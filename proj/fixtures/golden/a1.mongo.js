db.inventory.aggregate([
  { $match: { $expr: { $eq: ["$instock", 80] } } }
])
