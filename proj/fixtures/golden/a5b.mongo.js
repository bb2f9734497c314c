db.inventory.aggregate([
  { $sort: { "_id": 1 } },
  { $limit: 1 }
])
