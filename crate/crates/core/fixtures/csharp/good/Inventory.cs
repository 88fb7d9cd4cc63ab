using System.Collections.Generic;
using System.Linq;
using UnityEngine;

[System.Serializable]
public struct ItemStack
{
    public string itemId;
    public int count;
}

public class Inventory : MonoBehaviour
{
    [SerializeField] private int capacity = 12;
    [SerializeField] private List<ItemStack> items = new List<ItemStack>();

    public IReadOnlyList<ItemStack> Items => items;

    public bool Add(string itemId, int count = 1)
    {
        int slot = items.FindIndex(s => s.itemId == itemId);
        if (slot >= 0)
        {
            var stack = items[slot];
            stack.count += count;
            items[slot] = stack;
            return true;
        }
        if (items.Count >= capacity) return false;
        items.Add(new ItemStack { itemId = itemId, count = count });
        return true;
    }

    public int CountOf(string itemId) => items.Where(s => s.itemId == itemId).Sum(s => s.count);
}
