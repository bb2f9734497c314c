db.inventory.aggregate([
  { $sort: { "instock": 1, "sku": 1 } }
])
